// Copyright 2026 The RPG Lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "rpg/data.h"

#include <bit>
#include <cmath>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include "rpg/errors.h"
#include "rpg/random.h"

namespace rpg {
namespace {

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> SplitFields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(Trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

template <typename T>
bool ParseField(std::string_view field, T& out) {
  if (field.empty()) return false;
  if (field.front() == '+') field.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
  return ec == std::errc() && ptr == field.data() + field.size();
}

}  // namespace

LabeledSet::LabeledSet(Matrix features, std::vector<int> labels,
                       int num_classes)
    : features_(std::move(features)),
      labels_(std::move(labels)),
      num_classes_(num_classes) {
  if (labels_.empty()) throw InvalidArgument("LabeledSet: empty set");
  if (static_cast<std::size_t>(features_.rows()) != labels_.size()) {
    throw InvalidArgument("LabeledSet: feature rows and labels differ in count");
  }
  if (num_classes_ < 1) throw InvalidArgument("LabeledSet: num_classes < 1");
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] < 0 || labels_[i] >= num_classes_) {
      throw InvalidArgument("LabeledSet: label out of range at row " +
                            std::to_string(i));
    }
  }
}

LabeledSet LabeledSet::Subset(std::span<const std::size_t> indices) const {
  Matrix rows(static_cast<Eigen::Index>(indices.size()), features_.cols());
  std::vector<int> picked(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= size()) throw InvalidArgument("Subset: index out of range");
    rows.row(static_cast<Eigen::Index>(i)) =
        features_.row(static_cast<Eigen::Index>(indices[i]));
    picked[i] = labels_[indices[i]];
  }
  return LabeledSet(std::move(rows), std::move(picked), num_classes_);
}

bool LabeledSet::operator==(const LabeledSet& other) const {
  return num_classes_ == other.num_classes_ && labels_ == other.labels_ &&
         features_.rows() == other.features_.rows() &&
         features_.cols() == other.features_.cols() &&
         features_ == other.features_;
}

LabeledSet LoadCsv(const std::filesystem::path& path, bool has_header) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<double> values;
  std::vector<int> labels;
  long width = -1;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (has_header && line_no == 1) continue;
    if (Trim(line).empty()) continue;
    const auto fields = SplitFields(line);
    const long cols = static_cast<long>(fields.size()) - 1;
    if (cols < 1) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": need at least one feature and a label");
    }
    if (width >= 0 && cols != width) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": expected " + std::to_string(width + 1) +
                       " fields, got " + std::to_string(cols + 1));
    }
    width = cols;
    for (long c = 0; c < cols; ++c) {
      double v;
      if (!ParseField(fields[c], v) || !std::isfinite(v)) {
        throw ParseError(path.string() + ":" + std::to_string(line_no) +
                         ": non-numeric feature in column " +
                         std::to_string(c + 1));
      }
      values.push_back(v);
    }
    int label;
    if (!ParseField(fields.back(), label) || label < 0) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": label must be a non-negative integer");
    }
    labels.push_back(label);
  }
  if (labels.empty()) throw ParseError(path.string() + ": no data rows");
  Matrix features = Eigen::Map<Matrix>(values.data(),
                                       static_cast<Eigen::Index>(labels.size()),
                                       width);
  const int num_classes = *std::max_element(labels.begin(), labels.end()) + 1;
  return LabeledSet(std::move(features), std::move(labels), num_classes);
}

void SaveCsv(const LabeledSet& set, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  char buf[32];
  for (std::size_t i = 0; i < set.size(); ++i) {
    for (int c = 0; c < set.feature_dim(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g",
                    set.features()(static_cast<Eigen::Index>(i), c));
      out << buf << ',';
    }
    out << set.labels()[i] << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

Vector BlobCenter(int label, int dim) {
  Vector center(dim);
  const double a = 1.0 / std::sqrt(static_cast<double>(dim));
  for (int c = 0; c < dim; ++c) {
    center(c) = (std::popcount(static_cast<unsigned>((label + 1) & c)) % 2 == 0) ? a : -a;
  }
  return center;
}

LabeledSet SynthBlobs(int n_per_class, int num_classes, int dim, double spread,
                      uint64_t seed) {
  if (n_per_class < 1 || num_classes < 1 || dim < 1 || spread < 0.0) {
    throw InvalidArgument("SynthBlobs: counts must be positive, spread >= 0");
  }
  const Eigen::Index n = static_cast<Eigen::Index>(n_per_class) * num_classes;
  Matrix features(n, dim);
  std::vector<int> labels(static_cast<std::size_t>(n));
  RandomStream rng(seed, StreamId(StreamTag::kSynthetic, 0));
  for (Eigen::Index i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % num_classes);
    labels[static_cast<std::size_t>(i)] = label;
    const Vector center = BlobCenter(label, dim);
    for (int c = 0; c < dim; ++c) {
      features(i, c) = center(c) + spread * rng.Normal();
    }
  }
  return LabeledSet(std::move(features), std::move(labels), num_classes);
}

TrainTestSplit SplitTrainTest(const LabeledSet& set, std::size_t n_train,
                              uint64_t seed) {
  if (n_train == 0 || n_train >= set.size()) {
    throw InvalidArgument("SplitTrainTest: need 0 < n_train < N");
  }
  RandomStream rng(seed, StreamId(StreamTag::kSplit, 0));
  auto order = SampleWithoutReplacement(rng, set.size(), set.size());
  std::vector<std::size_t> train(order.begin(), order.begin() + n_train);
  std::vector<std::size_t> test(order.begin() + n_train, order.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {set.Subset(train), set.Subset(test), std::move(train),
          std::move(test)};
}

std::vector<std::size_t> BatchIndices(const BatchSchedule& schedule,
                                      std::size_t set_size, int64_t t) {
  if (t < 1) throw InvalidArgument("BatchIndices: iterations start at t = 1");
  if (schedule.batch_size == 0 || schedule.batch_size > set_size) {
    throw InvalidArgument("BatchIndices: batch size must be in [1, N]");
  }
  RandomStream rng(schedule.seed,
                   StreamId(StreamTag::kBatch, static_cast<uint64_t>(t)));
  return SampleWithoutReplacement(rng, set_size, schedule.batch_size);
}

LabeledSet NextBatch(const LabeledSet& set, const BatchSchedule& schedule,
                     int64_t t) {
  const auto indices = BatchIndices(schedule, set.size(), t);
  return set.Subset(indices);
}

uint64_t HashIndices(std::span<const std::size_t> indices) {
  uint64_t hash = 0xcbf29ce484222325ull;
  for (std::size_t index : indices) {
    for (int byte = 0; byte < 8; ++byte) {
      hash ^= (static_cast<uint64_t>(index) >> (8 * byte)) & 0xFF;
      hash *= 0x100000001b3ull;
    }
  }
  return hash;
}

}  // namespace rpg
