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

#ifndef RPG_INTENSITY_H_
#define RPG_INTENSITY_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "rpg/adversarial.h"
#include "rpg/data.h"
#include "rpg/nn.h"
#include "rpg/training.h"

namespace rpg {

// Denominators at or below this are treated as a converged-to-zero gradient.
inline constexpr double kDegenerateDenominator = 1e-30;

// l_adv / l_erm. Throws DegenerateError when l_erm <= kDegenerateDenominator
// and InvalidArgument when l_adv < 0.
double SingleIntensity(double l_adv, double l_erm);

// (mean of v^4)^(1/4). Computed as max * (mean of (v / max)^4)^(1/4), which
// returns a constant series unchanged. Throws InvalidArgument on an empty or
// negative input.
double CompositeIntensity(std::span<const double> values);

struct IntensitySeries {
  std::vector<std::pair<int64_t, double>> values;  // (t, I_hat_t)
  double composite = 0.0;        // I_hat_{1:T}
  double l_erm_composite = 0.0;  // fourth-power mean root of l_erm
  std::size_t skipped = 0;       // records with a degenerate denominator
};

// Aggregates a ledger. l_erm_composite uses every record; the intensity
// composite uses the records that carry an I_hat.
IntensitySeries SummarizeIntensity(std::span<const IterationRecord> records);

// Per-example gradient norms at fixed parameters: clean gradients of the ERM
// model and gradients at PGD points of the adversarial model.
struct ExampleNorms {
  std::vector<double> erm;
  std::vector<double> adv;
};
ExampleNorms ComputeExampleNorms(const DenseNet& erm, const DenseNet& adv,
                                 const LabeledSet& set,
                                 const AttackSpec& attack,
                                 const LossSpec& loss);

struct ProbeRow {
  std::size_t batch_size = 0;
  std::size_t repeats = 0;
  double mean_estimate = 0.0;
  double full_value = 0.0;
  // Largest numerator and denominator seen in any sampled batch.
  double max_batch_l_adv = 0.0;
  double max_batch_l_erm = 0.0;
};

struct ProbeTable {
  double full_value = 0.0;
  double full_l_adv = 0.0;
  double full_l_erm = 0.0;
  std::vector<ProbeRow> rows;
};

// Empirical single-iteration intensity at a fixed parameter pair, averaged
// over `repeats` random batches for each batch size. Batch size N is
// evaluated once, on the full set. Batches for size tau come from the Philox
// stream (seed, StreamId(kProbe, tau)).
ProbeTable ConsistencyProbe(const DenseNet& erm, const DenseNet& adv,
                            const LabeledSet& set, const AttackSpec& attack,
                            const LossSpec& loss,
                            std::span<const std::size_t> batch_sizes,
                            int repeats, uint64_t seed);
ProbeTable ConsistencyProbe(const ExampleNorms& norms,
                            std::span<const std::size_t> batch_sizes,
                            int repeats, uint64_t seed);

void WriteProbeCsv(const ProbeTable& table, const std::filesystem::path& path);

}  // namespace rpg

#endif  // RPG_INTENSITY_H_
