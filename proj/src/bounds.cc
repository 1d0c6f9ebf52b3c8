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

#include "rpg/bounds.h"

#include <cmath>

#include "rpg/errors.h"

namespace rpg {

double StabilityBeta(double eps, double delta, double loss_bound) {
  if (!(loss_bound > 0.0)) throw InvalidArgument("stability: M must be > 0");
  if (!(eps >= 0.0)) throw InvalidArgument("stability: eps must be >= 0");
  if (!(delta >= 0.0 && delta <= 1.0)) {
    throw InvalidArgument("stability: delta must lie in [0, 1]");
  }
  const double decay = std::exp(-eps);
  return loss_bound * delta * decay + loss_bound * (1.0 - decay);
}

double OnAverageBound(double eps, double delta, double loss_bound) {
  return StabilityBeta(eps, delta, loss_bound);
}

double HighProbSampleTerm(double n, double gamma) {
  if (!(n >= 2.0)) throw InvalidArgument("high-probability bound: N must be >= 2");
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw InvalidArgument("high-probability bound: gamma must lie in (0, 1)");
  }
  return std::sqrt(std::log(1.0 / gamma) / n);
}

double HighProbBound(double beta, double n, double gamma, double c) {
  if (!(c > 0.0)) throw InvalidArgument("high-probability bound: c must be > 0");
  if (!(beta >= 0.0)) throw InvalidArgument("high-probability bound: beta must be >= 0");
  const double sample_term = HighProbSampleTerm(n, gamma);
  return c * (beta * std::log(n) * std::log(n / gamma) + sample_term);
}

BoundReport MakeBoundReport(double eps, double delta, double loss_bound,
                            double n, double gamma, double c) {
  BoundReport report;
  report.beta = StabilityBeta(eps, delta, loss_bound);
  report.on_avg_bound = OnAverageBound(eps, delta, loss_bound);
  report.high_prob_bound_normalized =
      HighProbBound(report.beta / loss_bound, n, gamma, c);
  report.high_prob_bound = loss_bound * report.high_prob_bound_normalized;
  report.loss_bound = loss_bound;
  report.eps = eps;
  report.delta = delta;
  report.n = n;
  report.gamma = gamma;
  report.c = c;
  return report;
}

}  // namespace rpg
