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

#include "rpg/membership.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "rpg/errors.h"

namespace rpg {
namespace {

void CheckNonEmpty(std::span<const double> train, std::span<const double> test) {
  if (train.empty() || test.empty()) {
    throw InvalidArgument("membership attack: confidence lists must be non-empty");
  }
}

double AccuracyFromCounts(std::size_t train_hits, std::size_t train_size,
                          std::size_t test_hits, std::size_t test_size) {
  return 0.5 * (static_cast<double>(train_hits) / static_cast<double>(train_size) +
                static_cast<double>(test_hits) / static_cast<double>(test_size));
}

}  // namespace

std::vector<double> TrueLabelConfidences(const DenseNet& net,
                                         const LabeledSet& set) {
  std::vector<double> confs;
  confs.reserve(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    const Vector logits =
        Logits(net, set.features().row(static_cast<Eigen::Index>(i)).transpose());
    const double peak = logits.maxCoeff();
    const double denom = (logits.array() - peak).exp().sum();
    confs.push_back(std::exp(logits(set.labels()[i]) - peak) / denom);
  }
  return confs;
}

double MiaAccuracy(std::span<const double> train_confs,
                   std::span<const double> test_confs, double zeta) {
  CheckNonEmpty(train_confs, test_confs);
  const auto train_hits = static_cast<std::size_t>(std::count_if(
      train_confs.begin(), train_confs.end(), [&](double c) { return c >= zeta; }));
  const auto test_hits = static_cast<std::size_t>(std::count_if(
      test_confs.begin(), test_confs.end(), [&](double c) { return c < zeta; }));
  return AccuracyFromCounts(train_hits, train_confs.size(), test_hits,
                            test_confs.size());
}

AttackReport OptimalThreshold(std::span<const double> train_confs,
                              std::span<const double> test_confs) {
  CheckNonEmpty(train_confs, test_confs);
  std::vector<double> train(train_confs.begin(), train_confs.end());
  std::vector<double> test(test_confs.begin(), test_confs.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());

  std::vector<double> candidates = {0.0, 1.0 + 1e-12};
  candidates.insert(candidates.end(), train.begin(), train.end());
  candidates.insert(candidates.end(), test.begin(), test.end());
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()),
                   candidates.end());

  AttackReport report;
  report.train_size = train.size();
  report.test_size = test.size();
  report.accuracy = -1.0;
  report.sweep.reserve(candidates.size());
  for (double zeta : candidates) {
    const std::size_t train_below = static_cast<std::size_t>(
        std::lower_bound(train.begin(), train.end(), zeta) - train.begin());
    const std::size_t test_below = static_cast<std::size_t>(
        std::lower_bound(test.begin(), test.end(), zeta) - test.begin());
    const double acc = AccuracyFromCounts(train.size() - train_below,
                                          train.size(), test_below, test.size());
    report.sweep.emplace_back(zeta, acc);
    if (acc > report.accuracy) {
      report.accuracy = acc;
      report.zeta_optim = zeta;
    }
  }
  return report;
}

void WriteAttackSweepCsv(const AttackReport& report,
                         const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "zeta,accuracy\n";
  char buf[64];
  for (const auto& [zeta, acc] : report.sweep) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", zeta, acc);
    out << buf;
  }
}

double GeneralizationGap(const DenseNet& net, const LabeledSet& train,
                         const LabeledSet& test) {
  return Accuracy(net, train) - Accuracy(net, test);
}

}  // namespace rpg
