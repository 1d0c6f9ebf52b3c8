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

#ifndef RPG_PRIVACY_H_
#define RPG_PRIVACY_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "rpg/adversarial.h"
#include "rpg/data.h"
#include "rpg/nn.h"

namespace rpg {

// Pooled, normalized gradient-noise samples (batch gradient minus full-set
// gradient, a random subset of coordinates per batch, divided by the pooled
// standard deviation).
struct NoiseSample {
  std::vector<double> values;
  double divisor = 1.0;  // pooled standard deviation before normalization
  int64_t iteration = 0;
  std::string model_tag;
};

struct NoiseOptions {
  std::size_t batch_size = 128;
  std::size_t batches = 50;
  std::size_t components_per_batch = 1000;
  uint64_t seed = 0;
  // Radius 0 measures clean (ERM) gradients; otherwise gradients at PGD points.
  AttackSpec attack;
  LossSpec loss;
};

// Batch b uses Philox streams (seed, StreamId(kNoise, 2b)) for the batch and
// (seed, StreamId(kNoise, 2b + 1)) for the coordinate subset. Batch indices
// are summed in ascending order, as is the full-set gradient, so a batch that
// covers the whole set yields exactly zero noise. Throws DegenerateError when
// the pooled deviation is zero.
NoiseSample CollectNoise(const DenseNet& net, const LabeledSet& set,
                         const NoiseOptions& options);

// Laplace maximum-likelihood fit: location is the sample median (lower median
// for even counts) and scale is the mean absolute deviation from it.
struct LaplaceFit {
  double location = 0.0;
  double scale = 0.0;
  std::size_t count = 0;
};
LaplaceFit FitLaplace(std::span<const double> sample);

struct Histogram {
  std::vector<double> edges;  // bins + 1 edges
  std::vector<uint64_t> counts;
  uint64_t below = 0;  // samples left of the first edge
  uint64_t above = 0;  // samples right of the last edge
};
// 201 equal bins on [-10, 10] unless told otherwise. The last bin is closed.
Histogram MakeHistogram(std::span<const double> sample, std::size_t bins = 201,
                        double lo = -10.0, double hi = 10.0);
void WriteHistogramCsv(const Histogram& histogram,
                       const std::filesystem::path& path);

// Population excess kurtosis, m4 / m2^2 - 3.
double ExcessKurtosis(std::span<const double> sample);

enum class Provenance { kPerStep, kComposed, kLeading, kErmBaseline };
const char* ProvenanceName(Provenance provenance);

struct BudgetInputs {
  double n = 0.0;
  double laplace_scale = 0.0;
  double iterations = 0.0;
  double delta_prime = 0.0;
  double l_erm_composite = 0.0;
  double intensity_composite = 0.0;
  double sum_eps = 0.0;
  double sum_eps_sq = 0.0;
};

struct PrivacyBudget {
  double epsilon = 0.0;
  double delta = 0.0;
  Provenance provenance = Provenance::kPerStep;
  BudgetInputs inputs;
};

// 2 * l_erm * intensity / (n * b). Throws InvalidArgument unless b > 0,
// n >= 1 and the other inputs are non-negative.
double PerStepEpsilon(double l_erm, double intensity, double n, double b);

// Advanced composition of per-step budgets:
//   eps = sqrt(2 ln(n / delta') * sum eps_t^2)
//         + sum eps_t (e^eps_t - 1) / (e^eps_t + 1),   delta = delta' / n.
// Throws InvalidArgument unless 0 < delta' < n and every eps_t >= 0.
PrivacyBudget Compose(std::span<const double> eps, double delta_prime,
                      double n);

// Leading term of the whole-run budget from fourth-power aggregates:
//   eps = (2 l_erm_1T * intensity_1T / (n b)) * sqrt(2 T ln(n / delta')).
// The O(1/n^2) remainder is not included.
PrivacyBudget LeadingEpsilon(double l_erm_composite, double intensity_composite,
                             double iterations, double n, double b,
                             double delta_prime);

// LeadingEpsilon with intensity 1: the ERM baseline.
PrivacyBudget ErmEpsilon(double l_erm_composite, double iterations, double n,
                         double b, double delta_prime);

}  // namespace rpg

#endif  // RPG_PRIVACY_H_
