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

#ifndef RPG_ANALYSIS_H_
#define RPG_ANALYSIS_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "rpg/adversarial.h"
#include "rpg/data.h"
#include "rpg/nn.h"

namespace rpg {

// Least-squares polynomial. The system is solved in the centered and scaled
// variable u = (x - center) / scale; `coefficients` re-expands the result in
// powers of x. Both are in ascending power order.
struct PolyFit {
  std::vector<double> coefficients;
  std::vector<double> scaled_coefficients;
  double center = 0.0;
  double scale = 1.0;

  double operator()(double x) const;
};

// Normal equations on the scaled Vandermonde matrix. Throws InvalidArgument
// on length mismatch and DegenerateError when fewer than degree + 1 distinct
// abscissae exist or the system is numerically singular.
PolyFit FitPolynomial(std::span<const double> xs, std::span<const double> ys,
                      int degree = 4);

// Spearman rank correlation with average ranks for ties. Throws
// InvalidArgument for fewer than 3 points and DegenerateError when either
// input is constant.
double Spearman(std::span<const double> xs, std::span<const double> ys);

// Average ranks, 1-based.
std::vector<double> AverageRanks(std::span<const double> values);

// Fraction of examples still classified correctly at their PGD points.
double AdversarialAccuracy(const DenseNet& net, const LabeledSet& set,
                           const AttackSpec& attack, const LossSpec& loss,
                           FeasibilityCounter* counter = nullptr);

// One row per (rho, seed) run.
struct SweepRow {
  double rho = 0.0;
  uint64_t seed = 0;
  double intensity = 0.0;
  double adv_accuracy = 0.0;
  double attack_accuracy = 0.0;
  double gen_gap = 0.0;
  double eps_leading = 0.0;
  double on_avg_bound = 0.0;
  double high_prob_bound = 0.0;
  double eps_composed = 0.0;
  double eps_erm = 0.0;
  double laplace_scale = 0.0;
  double erm_attack_accuracy = 0.0;
  double erm_gen_gap = 0.0;
  uint64_t pgd_checked = 0;
  uint64_t pgd_violations = 0;

  bool operator==(const SweepRow&) const = default;
};

// Rows sorted by (rho, seed); throws InvalidArgument on a duplicate key.
void SortSweep(std::vector<SweepRow>& rows);
void WriteSweepCsv(std::span<const SweepRow> rows,
                   const std::filesystem::path& path);
std::vector<SweepRow> ReadSweepCsv(const std::filesystem::path& path);

}  // namespace rpg

#endif  // RPG_ANALYSIS_H_
