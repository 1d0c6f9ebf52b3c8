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

#include "rpg/training.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "rpg/intensity.h"

namespace rpg {
namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

constexpr char kMagic[4] = {'R', 'P', 'G', '1'};

template <typename T>
void WriteRaw(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
bool ReadRaw(std::istream& in, T& value) {
  return static_cast<bool>(in.read(reinterpret_cast<char*>(&value), sizeof(T)));
}

double MaxOf(const std::vector<double>& values) {
  return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
}

std::vector<double> Norms(const ParamGradients& grads) {
  std::vector<double> norms;
  norms.reserve(grads.per_example.size());
  for (const auto& g : grads.per_example) norms.push_back(g.Norm());
  return norms;
}

double Mean(const std::vector<double>& values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

}  // namespace

double LearningRateSchedule::At(int64_t t) const {
  const int64_t drops = decay_interval > 0 ? (t - 1) / decay_interval : 0;
  return initial * std::pow(decay_factor, static_cast<double>(drops));
}

void TrainConfig::Validate() const {
  if (iterations < 1) throw InvalidArgument("train: iterations must be >= 1");
  if (log_interval < 1) throw InvalidArgument("train: log interval must be >= 1");
  if (batch_size == 0) throw InvalidArgument("train: batch size must be >= 1");
  if (learning_rate.decay_interval < 1) {
    throw InvalidArgument("train: decay interval must be >= 1");
  }
  if (!(loss.clip_m > 0.0)) throw InvalidArgument("train: clip M must be > 0");
  for (int w : hidden) {
    if (w < 1) throw InvalidArgument("train: hidden widths must be positive");
  }
  attack.Validate();
}

void SgdStep(DenseNet& net, const GradVector& grad, double learning_rate,
             SgdState& state, double momentum, double weight_decay) {
  const auto count = static_cast<Eigen::Index>(net.ParameterCount());
  if (grad.values.size() != count) {
    throw InvalidArgument("SgdStep: gradient length does not match network");
  }
  if (!grad.values.allFinite()) {
    throw DivergenceError("SgdStep: non-finite gradient entry");
  }
  Vector theta = net.Flatten();
  if (state.velocity.size() != count) state.velocity = Vector::Zero(count);
  Vector g = grad.values;
  if (weight_decay != 0.0) g += weight_decay * theta;
  if (momentum != 0.0) {
    state.velocity = momentum * state.velocity + g;
  } else {
    state.velocity = g;
  }
  theta -= learning_rate * state.velocity;
  if (!theta.allFinite()) throw DivergenceError("SgdStep: parameters overflowed");
  net.AssignFlat(theta);
}

RunLedger TrainTwin(const LabeledSet& train, const LabeledSet& test,
                    const TrainConfig& config) {
  config.Validate();
  if (config.batch_size > train.size()) {
    throw InvalidArgument("train: batch size exceeds training set size");
  }
  std::vector<int> widths{train.feature_dim()};
  widths.insert(widths.end(), config.hidden.begin(), config.hidden.end());
  widths.push_back(train.num_classes());
  const DenseNet init =
      DenseNet::Initialize(widths, config.activation, config.seed);

  RunLedger ledger{.config = config, .records = {}, .erm = init, .adv = init};
  const BatchSchedule erm_schedule{config.seed, config.batch_size};
  const BatchSchedule adv_schedule{config.seed, config.batch_size};
  SgdState erm_state, adv_state;

  for (int64_t t = 1; t <= config.iterations; ++t) {
    const auto erm_indices = BatchIndices(erm_schedule, train.size(), t);
    const auto adv_indices = BatchIndices(adv_schedule, train.size(), t);
    const ParamGradients erm_grads =
        GradParams(ledger.erm, train.Subset(erm_indices), config.loss);
    const ParamGradients adv_grads =
        AdvGrad(ledger.adv, train.Subset(adv_indices), config.attack,
                config.loss, &ledger.feasibility);
    const double loss_erm = Mean(erm_grads.losses);
    const double loss_adv = Mean(adv_grads.losses);
    if (!std::isfinite(loss_erm) || !std::isfinite(loss_adv) ||
        !erm_grads.mean.values.allFinite() ||
        !adv_grads.mean.values.allFinite()) {
      ledger.diverged = true;
      ledger.divergence_message =
          "non-finite loss or gradient at iteration " + std::to_string(t);
      throw TrainingDiverged(ledger.divergence_message, std::move(ledger));
    }

    if (t % config.log_interval == 0) {
      IterationRecord record;
      record.t = t;
      record.l_erm = MaxOf(Norms(erm_grads));
      record.l_adv = MaxOf(Norms(adv_grads));
      record.loss_erm = loss_erm;
      record.loss_adv = loss_adv;
      record.erm_batch_hash = HashIndices(erm_indices);
      record.adv_batch_hash = HashIndices(adv_indices);
      if (record.l_erm > kDegenerateDenominator) {
        record.i_hat = SingleIntensity(record.l_adv, record.l_erm);
      }
      ledger.records.push_back(record);
    }

    const double lr = config.learning_rate.At(t);
    SgdStep(ledger.erm, erm_grads.mean, lr, erm_state, config.momentum,
            config.weight_decay);
    SgdStep(ledger.adv, adv_grads.mean, lr, adv_state, config.momentum,
            config.weight_decay);
  }

  ledger.erm_train_accuracy = Accuracy(ledger.erm, train);
  ledger.erm_test_accuracy = Accuracy(ledger.erm, test);
  ledger.adv_train_accuracy = Accuracy(ledger.adv, train);
  ledger.adv_test_accuracy = Accuracy(ledger.adv, test);
  return ledger;
}

void SaveCheckpoint(const DenseNet& net, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  out.write(kMagic, 4);
  const auto widths = net.Widths();
  WriteRaw<uint32_t>(out, static_cast<uint32_t>(net.activation()));
  WriteRaw<uint32_t>(out, static_cast<uint32_t>(widths.size() - 1));
  for (int w : widths) WriteRaw<uint32_t>(out, static_cast<uint32_t>(w));
  const Vector flat = net.Flatten();
  WriteRaw<uint64_t>(out, static_cast<uint64_t>(flat.size()));
  out.write(reinterpret_cast<const char*>(flat.data()),
            static_cast<std::streamsize>(flat.size() * sizeof(double)));
  if (!out) throw IoError("checkpoint write failed: " + path.string());
}

DenseNet LoadCheckpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  const std::string where = "checkpoint " + path.string() + ": ";
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw ParseError(where + "bad magic (expected RPG1)");
  }
  uint32_t activation, layers;
  if (!ReadRaw(in, activation) || !ReadRaw(in, layers)) {
    throw ParseError(where + "truncated header");
  }
  if (activation > 1) throw ParseError(where + "unknown activation code");
  if (layers == 0 || layers > 1024) throw ParseError(where + "bad layer count");
  std::vector<int> widths(layers + 1);
  uint64_t expected = 0;
  for (uint32_t i = 0; i <= layers; ++i) {
    uint32_t w;
    if (!ReadRaw(in, w)) throw ParseError(where + "truncated header");
    if (w == 0 || w > (1u << 24)) throw ParseError(where + "bad layer width");
    widths[i] = static_cast<int>(w);
    if (i > 0) expected += static_cast<uint64_t>(widths[i]) * (widths[i - 1] + 1);
  }
  uint64_t count;
  if (!ReadRaw(in, count)) throw ParseError(where + "truncated header");
  if (count != expected) {
    throw ParseError(where + "header dims imply " + std::to_string(expected) +
                     " parameters but payload declares " +
                     std::to_string(count));
  }
  Vector flat(static_cast<Eigen::Index>(count));
  if (!in.read(reinterpret_cast<char*>(flat.data()),
               static_cast<std::streamsize>(count * sizeof(double)))) {
    throw ParseError(where + "truncated payload");
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw ParseError(where + "trailing bytes after payload");
  }
  if (!flat.allFinite()) throw ParseError(where + "non-finite parameter");
  return DenseNet::FromFlat(widths, static_cast<Activation>(activation), flat);
}

void WriteLedgerCsv(const std::vector<IterationRecord>& records,
                    const std::filesystem::path& path,
                    const std::vector<std::optional<double>>& eps) {
  if (!eps.empty() && eps.size() != records.size()) {
    throw InvalidArgument("WriteLedgerCsv: eps list must match records");
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "t,l_erm,l_adv,i_hat,loss_erm,loss_adv,erm_batch_hash,"
         "adv_batch_hash,eps_t\n";
  char buf[96];
  auto real = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    out << r.t << ',' << real(r.l_erm) << ',' << real(r.l_adv) << ','
        << (r.i_hat ? real(*r.i_hat) : std::string()) << ','
        << real(r.loss_erm) << ',' << real(r.loss_adv) << ','
        << r.erm_batch_hash << ',' << r.adv_batch_hash << ',';
    if (!eps.empty() && eps[i]) out << real(*eps[i]);
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<IterationRecord> ReadLedgerCsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);  // header
  std::vector<IterationRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (line.back() == ',') fields.emplace_back();
    if (fields.size() != 9) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": expected 9 fields");
    }
    try {
      IterationRecord r;
      r.t = std::stoll(fields[0]);
      r.l_erm = std::stod(fields[1]);
      r.l_adv = std::stod(fields[2]);
      if (!fields[3].empty()) r.i_hat = std::stod(fields[3]);
      r.loss_erm = std::stod(fields[4]);
      r.loss_adv = std::stod(fields[5]);
      r.erm_batch_hash = std::stoull(fields[6]);
      r.adv_batch_hash = std::stoull(fields[7]);
      records.push_back(r);
    } catch (const std::logic_error&) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": malformed number");
    }
  }
  return records;
}

}  // namespace rpg
