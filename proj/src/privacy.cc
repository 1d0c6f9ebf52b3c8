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

#include "rpg/privacy.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "rpg/errors.h"
#include "rpg/random.h"

namespace rpg {
namespace {

Vector MeanGradient(const DenseNet& net, const LabeledSet& set,
                    std::vector<std::size_t> indices, const NoiseOptions& o) {
  std::sort(indices.begin(), indices.end());
  const LabeledSet batch = set.Subset(indices);
  return AdvGrad(net, batch, o.attack, o.loss).mean.values;
}

void CheckDeltaPrime(double delta_prime, double n) {
  if (!(n >= 1.0)) throw InvalidArgument("privacy: N must be >= 1");
  if (!(delta_prime > 0.0) || !(delta_prime < n)) {
    throw InvalidArgument("privacy: need 0 < delta' < N so ln(N / delta') > 0");
  }
}

}  // namespace

NoiseSample CollectNoise(const DenseNet& net, const LabeledSet& set,
                         const NoiseOptions& options) {
  if (options.batch_size == 0 || options.batch_size > set.size()) {
    throw InvalidArgument("CollectNoise: batch size must be in [1, N]");
  }
  if (options.batches == 0) throw InvalidArgument("CollectNoise: no batches");
  const std::size_t params = net.ParameterCount();
  const std::size_t per_batch = std::min(options.components_per_batch, params);

  std::vector<std::size_t> all(set.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const Vector full = MeanGradient(net, set, all, options);

  NoiseSample sample;
  sample.values.reserve(options.batches * per_batch);
  for (std::size_t b = 0; b < options.batches; ++b) {
    RandomStream batch_rng(options.seed, StreamId(StreamTag::kNoise, 2 * b));
    RandomStream coord_rng(options.seed, StreamId(StreamTag::kNoise, 2 * b + 1));
    auto indices =
        SampleWithoutReplacement(batch_rng, set.size(), options.batch_size);
    const Vector diff = MeanGradient(net, set, std::move(indices), options) - full;
    for (std::size_t c : SampleWithoutReplacement(coord_rng, params, per_batch)) {
      sample.values.push_back(diff(static_cast<Eigen::Index>(c)));
    }
  }

  double mean = 0.0;
  for (double v : sample.values) mean += v;
  mean /= static_cast<double>(sample.values.size());
  double var = 0.0;
  for (double v : sample.values) var += (v - mean) * (v - mean);
  var /= static_cast<double>(sample.values.size());
  const double sd = std::sqrt(var);
  if (!(sd > 0.0)) {
    throw DegenerateError("CollectNoise: pooled noise has zero deviation");
  }
  for (double& v : sample.values) v /= sd;
  sample.divisor = sd;
  return sample;
}

LaplaceFit FitLaplace(std::span<const double> sample) {
  if (sample.size() < 2) throw DegenerateError("FitLaplace: need >= 2 values");
  std::vector<double> sorted(sample.begin(), sample.end());
  const std::size_t mid = (sorted.size() - 1) / 2;
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<long>(mid),
                   sorted.end());
  LaplaceFit fit;
  fit.location = sorted[mid];
  fit.count = sample.size();
  double sum = 0.0;
  for (double v : sample) sum += std::abs(v - fit.location);
  fit.scale = sum / static_cast<double>(sample.size());
  if (!(fit.scale > 0.0)) {
    throw DegenerateError("FitLaplace: all values identical");
  }
  return fit;
}

Histogram MakeHistogram(std::span<const double> sample, std::size_t bins,
                        double lo, double hi) {
  if (bins == 0 || !(hi > lo)) throw InvalidArgument("MakeHistogram: bad range");
  Histogram h;
  h.edges.resize(bins + 1);
  const double width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t i = 0; i <= bins; ++i) h.edges[i] = lo + width * static_cast<double>(i);
  h.edges.back() = hi;
  h.counts.assign(bins, 0);
  for (double v : sample) {
    if (v < lo) {
      ++h.below;
    } else if (v > hi) {
      ++h.above;
    } else {
      auto bin = static_cast<std::size_t>((v - lo) / width);
      ++h.counts[std::min(bin, bins - 1)];
    }
  }
  return h;
}

void WriteHistogramCsv(const Histogram& histogram,
                       const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "lower,upper,count\n";
  char buf[96];
  for (std::size_t i = 0; i < histogram.counts.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%llu\n", histogram.edges[i],
                  histogram.edges[i + 1],
                  static_cast<unsigned long long>(histogram.counts[i]));
    out << buf;
  }
}

double ExcessKurtosis(std::span<const double> sample) {
  if (sample.size() < 2) throw DegenerateError("kurtosis: need >= 2 values");
  double mean = 0.0;
  for (double v : sample) mean += v;
  mean /= static_cast<double>(sample.size());
  double m2 = 0.0, m4 = 0.0;
  for (double v : sample) {
    const double d2 = (v - mean) * (v - mean);
    m2 += d2;
    m4 += d2 * d2;
  }
  m2 /= static_cast<double>(sample.size());
  m4 /= static_cast<double>(sample.size());
  if (!(m2 > 0.0)) throw DegenerateError("kurtosis: zero variance");
  return m4 / (m2 * m2) - 3.0;
}

const char* ProvenanceName(Provenance provenance) {
  switch (provenance) {
    case Provenance::kPerStep: return "per_step";
    case Provenance::kComposed: return "composed";
    case Provenance::kLeading: return "leading";
    case Provenance::kErmBaseline: return "erm_baseline";
  }
  return "unknown";
}

double PerStepEpsilon(double l_erm, double intensity, double n, double b) {
  if (!(b > 0.0)) throw InvalidArgument("per-step epsilon: Laplace scale b must be > 0");
  if (!(n >= 1.0)) throw InvalidArgument("per-step epsilon: N must be >= 1");
  if (!(l_erm >= 0.0) || !(intensity >= 0.0)) {
    throw InvalidArgument("per-step epsilon: inputs must be non-negative");
  }
  return 2.0 * l_erm * intensity / (n * b);
}

PrivacyBudget Compose(std::span<const double> eps, double delta_prime,
                      double n) {
  CheckDeltaPrime(delta_prime, n);
  double sum = 0.0, sum_sq = 0.0, second_order = 0.0;
  for (double e : eps) {
    if (!(e >= 0.0) || !std::isfinite(e)) {
      throw InvalidArgument("compose: per-step epsilon must be finite and >= 0");
    }
    sum += e;
    sum_sq += e * e;
    // (e^x - 1) / (e^x + 1) == tanh(x / 2), without cancellation for small x.
    second_order += e * std::tanh(0.5 * e);
  }
  PrivacyBudget budget;
  budget.epsilon =
      std::sqrt(2.0 * std::log(n / delta_prime) * sum_sq) + second_order;
  budget.delta = delta_prime / n;
  budget.provenance = Provenance::kComposed;
  budget.inputs.n = n;
  budget.inputs.iterations = static_cast<double>(eps.size());
  budget.inputs.delta_prime = delta_prime;
  budget.inputs.sum_eps = sum;
  budget.inputs.sum_eps_sq = sum_sq;
  return budget;
}

PrivacyBudget LeadingEpsilon(double l_erm_composite, double intensity_composite,
                             double iterations, double n, double b,
                             double delta_prime) {
  CheckDeltaPrime(delta_prime, n);
  if (!(iterations >= 1.0)) throw InvalidArgument("leading epsilon: T must be >= 1");
  const double per_step = PerStepEpsilon(l_erm_composite, intensity_composite, n, b);
  PrivacyBudget budget;
  budget.epsilon =
      per_step * std::sqrt(2.0 * iterations * std::log(n / delta_prime));
  budget.delta = delta_prime / n;
  budget.provenance = Provenance::kLeading;
  budget.inputs = {.n = n,
                   .laplace_scale = b,
                   .iterations = iterations,
                   .delta_prime = delta_prime,
                   .l_erm_composite = l_erm_composite,
                   .intensity_composite = intensity_composite};
  return budget;
}

PrivacyBudget ErmEpsilon(double l_erm_composite, double iterations, double n,
                         double b, double delta_prime) {
  PrivacyBudget budget =
      LeadingEpsilon(l_erm_composite, 1.0, iterations, n, b, delta_prime);
  budget.provenance = Provenance::kErmBaseline;
  return budget;
}

}  // namespace rpg
