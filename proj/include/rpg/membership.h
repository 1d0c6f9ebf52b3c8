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

#ifndef RPG_MEMBERSHIP_H_
#define RPG_MEMBERSHIP_H_

#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "rpg/data.h"
#include "rpg/nn.h"

namespace rpg {

// Softmax probability the network assigns to each example's true label.
std::vector<double> TrueLabelConfidences(const DenseNet& net,
                                         const LabeledSet& set);

// Threshold attack accuracy under equal priors:
//   0.5 * (frac(train >= zeta) + frac(test < zeta)).
double MiaAccuracy(std::span<const double> train_confs,
                   std::span<const double> test_confs, double zeta);

struct AttackReport {
  double zeta_optim = 0.0;
  double accuracy = 0.0;
  std::vector<std::pair<double, double>> sweep;  // (zeta, Acc(zeta)), ascending
  std::size_t train_size = 0;
  std::size_t test_size = 0;
};

// Exhaustive search over every observed confidence plus the sentinels 0 and
// 1 + 1e-12. Acc is piecewise constant between candidates, so this finds the
// global maximum. Ties go to the smallest threshold.
AttackReport OptimalThreshold(std::span<const double> train_confs,
                              std::span<const double> test_confs);

void WriteAttackSweepCsv(const AttackReport& report,
                         const std::filesystem::path& path);

// Training accuracy minus test accuracy (argmax, first index wins ties).
double GeneralizationGap(const DenseNet& net, const LabeledSet& train,
                         const LabeledSet& test);

}  // namespace rpg

#endif  // RPG_MEMBERSHIP_H_
