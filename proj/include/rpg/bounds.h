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

#ifndef RPG_BOUNDS_H_
#define RPG_BOUNDS_H_

namespace rpg {

// Uniform stability of an (eps, delta)-private algorithm with loss in [0, M]:
//   beta = M delta e^-eps + M (1 - e^-eps).
// Throws InvalidArgument unless M > 0, eps >= 0 and delta in [0, 1].
double StabilityBeta(double eps, double delta, double loss_bound);

// On-average generalization bound. Same expression as StabilityBeta.
double OnAverageBound(double eps, double delta, double loss_bound);

// High-probability generalization bound, holding with probability 1 - gamma:
//   c * (beta ln N ln(N / gamma) + sqrt(ln(1 / gamma) / N)).
// Throws InvalidArgument unless N >= 2, gamma in (0, 1) and c > 0.
double HighProbBound(double beta, double n, double gamma, double c);

// The sqrt(ln(1 / gamma) / N) part of HighProbBound, before scaling by c.
double HighProbSampleTerm(double n, double gamma);

// Bounds for one privacy budget. The high-probability bound is stated for a
// loss bounded by 1, so it is evaluated on loss / M (beta / M) and reported
// both in normalized units and rescaled by M.
struct BoundReport {
  double beta = 0.0;
  double on_avg_bound = 0.0;
  double high_prob_bound_normalized = 0.0;
  double high_prob_bound = 0.0;  // normalized * M
  double loss_bound = 0.0;
  double eps = 0.0;
  double delta = 0.0;
  double n = 0.0;
  double gamma = 0.0;
  double c = 0.0;
};

BoundReport MakeBoundReport(double eps, double delta, double loss_bound,
                            double n, double gamma, double c);

}  // namespace rpg

#endif  // RPG_BOUNDS_H_
