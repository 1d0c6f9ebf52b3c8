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

#include <gtest/gtest.h>

#include "rpg/errors.h"
#include "rpg/privacy.h"
#include "rpg/random.h"

namespace rpg {
namespace {

TEST(StabilityBeta, Examples) {
  EXPECT_EQ(StabilityBeta(0.0, 0.0, 1.0), 0.0);
  EXPECT_EQ(StabilityBeta(0.0, 1.0, 3.5), 3.5);
  EXPECT_NEAR(StabilityBeta(0.1, 0.01, 1.0), 0.10421095614440001, 1e-15);
  EXPECT_NEAR(StabilityBeta(0.1, 0.01, 10.0), 1.0421095614440001, 1e-14);
}

TEST(StabilityBeta, RejectsBadInputs) {
  EXPECT_THROW(StabilityBeta(0.1, 0.01, 0.0), InvalidArgument);
  EXPECT_THROW(StabilityBeta(-0.1, 0.01, 1.0), InvalidArgument);
  EXPECT_THROW(StabilityBeta(0.1, 1.5, 1.0), InvalidArgument);
  EXPECT_THROW(StabilityBeta(0.1, -0.1, 1.0), InvalidArgument);
}

TEST(OnAverageBound, BitwiseEqualToBeta) {
  RandomStream rng(8, StreamId(StreamTag::kTest, 3));
  for (int i = 0; i < 1000; ++i) {
    const double eps = 5.0 * rng.Uniform();
    const double delta = rng.Uniform();
    const double m = 0.01 + 20.0 * rng.Uniform();
    const double beta = StabilityBeta(eps, delta, m);
    EXPECT_EQ(OnAverageBound(eps, delta, m), beta);
    EXPECT_LE(beta, m);
    EXPECT_GE(beta, 0.0);
  }
}

TEST(OnAverageBound, MonotoneInEpsAndDelta) {
  RandomStream rng(9, 0);
  for (int i = 0; i < 500; ++i) {
    const double eps = 3.0 * rng.Uniform();
    const double delta = 0.99 * rng.Uniform();
    const double base = OnAverageBound(eps, delta, 2.0);
    EXPECT_GE(OnAverageBound(eps + 1e-3, delta, 2.0), base);
    EXPECT_GE(OnAverageBound(eps, delta + 1e-3, 2.0), base);
  }
}

TEST(HighProbBound, Examples) {
  EXPECT_NEAR(HighProbBound(0.0, 100.0, std::exp(-1.0), 1.0), 0.1, 1e-15);
  EXPECT_LT(HighProbBound(0.0, 100.0, 1.0 - 1e-12, 1.0), 1e-6);
  EXPECT_NEAR(HighProbBound(0.01, 1000.0, 0.05, 1.0), 0.7388419672647729, 1e-14);
  EXPECT_NEAR(HighProbBound(0.01, 1000.0, 0.05, 2.5), 2.5 * 0.7388419672647729, 1e-13);
}

TEST(HighProbBound, RejectsBadInputs) {
  EXPECT_THROW(HighProbBound(0.1, 100.0, 0.0, 1.0), InvalidArgument);
  EXPECT_THROW(HighProbBound(0.1, 100.0, 1.0, 1.0), InvalidArgument);
  EXPECT_THROW(HighProbBound(0.1, 100.0, -0.5, 1.0), InvalidArgument);
  EXPECT_THROW(HighProbBound(0.1, 1.0, 0.5, 1.0), InvalidArgument);
  EXPECT_THROW(HighProbBound(0.1, 100.0, 0.5, 0.0), InvalidArgument);
}

TEST(BoundReport, NormalizesByLossBound) {
  const auto r = MakeBoundReport(0.1, 0.01, 10.0, 1000.0, 0.05, 1.0);
  EXPECT_EQ(r.beta, StabilityBeta(0.1, 0.01, 10.0));
  EXPECT_EQ(r.on_avg_bound, r.beta);
  EXPECT_DOUBLE_EQ(r.high_prob_bound_normalized,
                   HighProbBound(StabilityBeta(0.1, 0.01, 1.0), 1000.0, 0.05, 1.0));
  EXPECT_DOUBLE_EQ(r.high_prob_bound, 10.0 * r.high_prob_bound_normalized);
  EXPECT_EQ(r.loss_bound, 10.0);
  EXPECT_EQ(r.gamma, 0.05);
  EXPECT_EQ(r.n, 1000.0);
}

// eps(N) from the leading-order accountant, delta(N) = 1 / N.
// Parameters give a coefficient of 10: 2 * 1 * 1.25 * sqrt(2 * 8) / 1.
TEST(RateChecks, OnAverageBoundFollowsLeadingRate) {
  double lo = 1e300, hi = 0.0;
  for (double n : {1e3, 1e4, 1e5, 1e6}) {
    const auto budget = LeadingEpsilon(1.0, 1.25, 8.0, n, 1.0, 1.0);
    const double scaled =
        OnAverageBound(budget.epsilon, budget.delta, 1.0) * n / std::sqrt(std::log(n));
    lo = std::min(lo, scaled);
    hi = std::max(hi, scaled);
  }
  EXPECT_LE(hi / lo - 1.0, 0.05);
}

TEST(RateChecks, SampleTermScalesAsInverseRoot) {
  const double base = HighProbSampleTerm(1e3, 0.05) * std::sqrt(1e3);
  for (double n : {1e4, 1e5, 1e6}) {
    EXPECT_NEAR(HighProbSampleTerm(n, 0.05) * std::sqrt(n) / base, 1.0, 1e-12);
  }
}

}  // namespace
}  // namespace rpg
