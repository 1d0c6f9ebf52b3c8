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

#include "rpg/intensity.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "rpg/errors.h"
#include "rpg/random.h"

namespace rpg {

double SingleIntensity(double l_adv, double l_erm) {
  if (!(l_erm > kDegenerateDenominator)) {
    throw DegenerateError("intensity denominator is zero (l_erm = " +
                          std::to_string(l_erm) + ")");
  }
  if (!(l_adv >= 0.0)) throw InvalidArgument("intensity numerator is negative");
  return l_adv / l_erm;
}

double CompositeIntensity(std::span<const double> values) {
  if (values.empty()) throw InvalidArgument("composite of an empty series");
  double peak = 0.0;
  for (double v : values) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw InvalidArgument("composite requires finite non-negative values");
    }
    peak = std::max(peak, v);
  }
  if (peak == 0.0) return 0.0;
  double sum = 0.0;
  for (double v : values) {
    const double r = v / peak;
    const double r2 = r * r;
    sum += r2 * r2;
  }
  return peak * std::pow(sum / static_cast<double>(values.size()), 0.25);
}

IntensitySeries SummarizeIntensity(std::span<const IterationRecord> records) {
  IntensitySeries series;
  std::vector<double> intensities;
  std::vector<double> l_erm;
  for (const auto& record : records) {
    l_erm.push_back(record.l_erm);
    if (record.i_hat) {
      series.values.emplace_back(record.t, *record.i_hat);
      intensities.push_back(*record.i_hat);
    } else {
      ++series.skipped;
    }
  }
  if (!intensities.empty()) series.composite = CompositeIntensity(intensities);
  if (!l_erm.empty()) series.l_erm_composite = CompositeIntensity(l_erm);
  return series;
}

ExampleNorms ComputeExampleNorms(const DenseNet& erm, const DenseNet& adv,
                                 const LabeledSet& set,
                                 const AttackSpec& attack,
                                 const LossSpec& loss) {
  ExampleNorms norms;
  norms.erm = SummarizeGradients(erm, set, loss).norms;
  norms.adv =
      SummarizeGradients(adv, AdversarialBatch(adv, set, attack, loss), loss)
          .norms;
  return norms;
}

ProbeTable ConsistencyProbe(const ExampleNorms& norms,
                            std::span<const std::size_t> batch_sizes,
                            int repeats, uint64_t seed) {
  const std::size_t n = norms.erm.size();
  if (n == 0 || norms.adv.size() != n) {
    throw InvalidArgument("ConsistencyProbe: norm lists must align");
  }
  if (repeats < 1) throw InvalidArgument("ConsistencyProbe: repeats < 1");
  ProbeTable table;
  table.full_l_erm = *std::max_element(norms.erm.begin(), norms.erm.end());
  table.full_l_adv = *std::max_element(norms.adv.begin(), norms.adv.end());
  table.full_value = SingleIntensity(table.full_l_adv, table.full_l_erm);
  for (std::size_t tau : batch_sizes) {
    if (tau == 0 || tau > n) {
      throw InvalidArgument("ConsistencyProbe: batch size must be in [1, N]");
    }
    ProbeRow row;
    row.batch_size = tau;
    row.full_value = table.full_value;
    if (tau == n) {
      row.repeats = 1;
      row.mean_estimate = table.full_value;
      row.max_batch_l_adv = table.full_l_adv;
      row.max_batch_l_erm = table.full_l_erm;
      table.rows.push_back(row);
      continue;
    }
    RandomStream rng(seed, StreamId(StreamTag::kProbe, tau));
    double sum = 0.0;
    for (int r = 0; r < repeats; ++r) {
      const auto batch = SampleWithoutReplacement(rng, n, tau);
      double l_adv = 0.0, l_erm = 0.0;
      for (std::size_t i : batch) {
        l_adv = std::max(l_adv, norms.adv[i]);
        l_erm = std::max(l_erm, norms.erm[i]);
      }
      row.max_batch_l_adv = std::max(row.max_batch_l_adv, l_adv);
      row.max_batch_l_erm = std::max(row.max_batch_l_erm, l_erm);
      sum += SingleIntensity(l_adv, l_erm);
    }
    row.repeats = static_cast<std::size_t>(repeats);
    row.mean_estimate = sum / repeats;
    table.rows.push_back(row);
  }
  return table;
}

ProbeTable ConsistencyProbe(const DenseNet& erm, const DenseNet& adv,
                            const LabeledSet& set, const AttackSpec& attack,
                            const LossSpec& loss,
                            std::span<const std::size_t> batch_sizes,
                            int repeats, uint64_t seed) {
  return ConsistencyProbe(ComputeExampleNorms(erm, adv, set, attack, loss),
                          batch_sizes, repeats, seed);
}

void WriteProbeCsv(const ProbeTable& table, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "batch_size,repeats,mean_estimate,full_value,abs_gap\n";
  char buf[160];
  for (const auto& row : table.rows) {
    std::snprintf(buf, sizeof(buf), "%zu,%zu,%.17g,%.17g,%.17g\n",
                  row.batch_size, row.repeats, row.mean_estimate,
                  row.full_value, std::abs(row.full_value - row.mean_estimate));
    out << buf;
  }
}

}  // namespace rpg
