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

#include <gtest/gtest.h>

#include "rpg/errors.h"
#include "rpg/random.h"

namespace rpg {
namespace {

TEST(SingleIntensity, Ratio) {
  EXPECT_EQ(SingleIntensity(2.5, 2.5), 1.0);
  EXPECT_EQ(SingleIntensity(3.0, 1.5), 2.0);
}

TEST(SingleIntensity, DegenerateDenominator) {
  EXPECT_THROW(SingleIntensity(1.0, 0.0), DegenerateError);
  EXPECT_THROW(SingleIntensity(1.0, 1e-31), DegenerateError);
  EXPECT_THROW(SingleIntensity(-1.0, 1.0), InvalidArgument);
}

TEST(CompositeIntensity, ConstantSeries) {
  const std::vector<double> v(17, 1.7);
  EXPECT_EQ(CompositeIntensity(v), 1.7);
}

TEST(CompositeIntensity, Singleton) {
  const std::vector<double> v = {0.123};
  EXPECT_EQ(CompositeIntensity(v), 0.123);
}

TEST(CompositeIntensity, OneAndThree) {
  // ((1 + 81) / 2)^(1/4) = 41^(1/4), evaluated in extended precision.
  const std::vector<double> v = {1.0, 3.0};
  EXPECT_NEAR(CompositeIntensity(v), 2.530439534435243, 1e-15);
}

TEST(CompositeIntensity, EmptyThrows) {
  EXPECT_THROW(CompositeIntensity(std::vector<double>{}), InvalidArgument);
}

TEST(CompositeIntensity, BetweenMinAndMaxAndScaleCovariant) {
  RandomStream rng(1, 0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v(1 + rng.Below(30));
    for (double& x : v) x = 0.1 + 5.0 * rng.Uniform();
    const double c = CompositeIntensity(v);
    EXPECT_GE(c, *std::min_element(v.begin(), v.end()));
    EXPECT_LE(c, *std::max_element(v.begin(), v.end()));
    std::vector<double> scaled = v;
    for (double& x : scaled) x *= 3.5;
    EXPECT_NEAR(CompositeIntensity(scaled), 3.5 * c, 1e-13 * c);
  }
}

TEST(CompositeIntensity, HugeValuesDoNotOverflow) {
  const std::vector<double> v = {1e100, 2e100};
  EXPECT_NEAR(CompositeIntensity(v) / 1e100, std::pow(8.5, 0.25), 1e-14);
}

TEST(SummarizeIntensity, SkipsDegenerateRecords) {
  std::vector<IterationRecord> records(3);
  records[0] = {.t = 1, .l_erm = 1.0, .l_adv = 2.0, .i_hat = 2.0};
  records[1] = {.t = 2, .l_erm = 0.0, .l_adv = 1.0};
  records[2] = {.t = 3, .l_erm = 2.0, .l_adv = 2.0, .i_hat = 1.0};
  const auto s = SummarizeIntensity(records);
  EXPECT_EQ(s.skipped, 1u);
  ASSERT_EQ(s.values.size(), 2u);
  EXPECT_NEAR(s.composite, std::pow((16.0 + 1.0) / 2.0, 0.25), 1e-15);
  EXPECT_NEAR(s.l_erm_composite, std::pow((1.0 + 0.0 + 16.0) / 3.0, 0.25), 1e-15);
}

ExampleNorms RandomNorms(std::size_t n, uint64_t seed) {
  RandomStream rng(seed, 0);
  ExampleNorms norms;
  for (std::size_t i = 0; i < n; ++i) {
    norms.erm.push_back(0.1 + rng.Uniform());
    norms.adv.push_back(0.1 + 2.0 * rng.Uniform());
  }
  return norms;
}

TEST(ConsistencyProbe, FullBatchIsExact) {
  const auto norms = RandomNorms(200, 3);
  const std::vector<std::size_t> sizes = {200};
  const auto table = ConsistencyProbe(norms, sizes, 10, 1);
  ASSERT_EQ(table.rows.size(), 1u);
  EXPECT_EQ(table.rows[0].mean_estimate, table.full_value);
  EXPECT_EQ(table.rows[0].repeats, 1u);
  EXPECT_EQ(table.full_value,
            *std::max_element(norms.adv.begin(), norms.adv.end()) /
                *std::max_element(norms.erm.begin(), norms.erm.end()));
}

TEST(ConsistencyProbe, ComponentsNeverExceedFullSet) {
  const auto norms = RandomNorms(300, 4);
  const std::vector<std::size_t> sizes = {5, 20, 75, 150};
  const auto table = ConsistencyProbe(norms, sizes, 50, 2);
  for (const auto& row : table.rows) {
    EXPECT_LE(row.max_batch_l_adv, table.full_l_adv);
    EXPECT_LE(row.max_batch_l_erm, table.full_l_erm);
  }
}

TEST(ConsistencyProbe, GapShrinksWithBatchSize) {
  const auto norms = RandomNorms(400, 5);
  const std::vector<std::size_t> sizes = {50, 200};
  const auto table = ConsistencyProbe(norms, sizes, 200, 3);
  const double gap_small = std::abs(table.full_value - table.rows[0].mean_estimate);
  const double gap_large = std::abs(table.full_value - table.rows[1].mean_estimate);
  EXPECT_LT(gap_large, gap_small);
}

TEST(ConsistencyProbe, SeededReplay) {
  const auto norms = RandomNorms(100, 6);
  const std::vector<std::size_t> sizes = {10, 30};
  const auto a = ConsistencyProbe(norms, sizes, 20, 9);
  const auto b = ConsistencyProbe(norms, sizes, 20, 9);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(a.rows[i].mean_estimate, b.rows[i].mean_estimate);
  }
}

TEST(ConsistencyProbe, RejectsBadBatchSize) {
  const auto norms = RandomNorms(10, 1);
  const std::vector<std::size_t> sizes = {11};
  EXPECT_THROW(ConsistencyProbe(norms, sizes, 1, 1), InvalidArgument);
}

TEST(ConsistencyProbe, OnNetworks) {
  const LabeledSet set = SynthBlobs(10, 2, 3, 0.5, 1);
  const std::vector<int> widths = {3, 6, 2};
  const DenseNet erm = DenseNet::Initialize(widths, Activation::kRelu, 1);
  const DenseNet adv = DenseNet::Initialize(widths, Activation::kRelu, 2);
  const std::vector<std::size_t> sizes = {5, 20};
  const auto table = ConsistencyProbe(erm, adv, set, AttackSpec{.radius = 0.1},
                                      LossSpec{}, sizes, 5, 1);
  EXPECT_EQ(table.rows.back().mean_estimate, table.full_value);
  const auto norms = ComputeExampleNorms(erm, adv, set, AttackSpec{.radius = 0.1}, LossSpec{});
  ASSERT_EQ(norms.erm.size(), 20u);
  EXPECT_EQ(norms.erm[3], GradExample(erm, set.features().row(3).transpose(),
                                      set.labels()[3], LossSpec{}).grad.Norm());
}

}  // namespace
}  // namespace rpg
