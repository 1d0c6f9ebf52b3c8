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

#include "rpg/training.h"

#include <cmath>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "rpg/errors.h"

namespace rpg {
namespace {

namespace fs = std::filesystem;

fs::path TempPath(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "rpg_training_test";
  fs::create_directories(dir);
  return dir / name;
}

DenseNet OneParam(double theta) {
  Matrix w(1, 1);
  w << theta;
  return DenseNet({DenseLayer{w, Vector::Zero(1)}}, Activation::kRelu);
}

GradVector Grad(double w, double b) {
  GradVector g;
  g.values = Vector(2);
  g.values << w, b;
  return g;
}

TEST(LearningRate, StepDecay) {
  const LearningRateSchedule s{.initial = 0.1, .decay_factor = 0.1, .decay_interval = 10};
  EXPECT_DOUBLE_EQ(s.At(1), 0.1);
  EXPECT_DOUBLE_EQ(s.At(10), 0.1);
  EXPECT_DOUBLE_EQ(s.At(11), 0.1 * 0.1);
  EXPECT_DOUBLE_EQ(s.At(21), 0.1 * 0.1 * 0.1);
}

TEST(SgdStep, ZeroRateLeavesParameters) {
  DenseNet net = OneParam(1.0);
  SgdState state;
  SgdStep(net, Grad(2.0, 1.0), 0.0, state, 0.9, 0.0);
  EXPECT_TRUE(net == OneParam(1.0));
}

TEST(SgdStep, PlainStep) {
  DenseNet net = OneParam(1.0);
  SgdState state;
  SgdStep(net, Grad(2.0, 0.0), 0.1, state, 0.0, 0.0);
  EXPECT_DOUBLE_EQ(net.layers()[0].weight(0, 0), 0.8);
}

TEST(SgdStep, HeavyBallUnrolled) {
  DenseNet net = OneParam(0.0);
  SgdState state;
  SgdStep(net, Grad(1.0, 0.0), 1.0, state, 0.9, 0.0);
  SgdStep(net, Grad(1.0, 0.0), 1.0, state, 0.9, 0.0);
  EXPECT_DOUBLE_EQ(net.layers()[0].weight(0, 0), -2.9);
}

TEST(SgdStep, WeightDecayAddsToGradient) {
  DenseNet net = OneParam(2.0);
  SgdState state;
  SgdStep(net, Grad(0.0, 0.0), 0.5, state, 0.0, 0.1);
  EXPECT_DOUBLE_EQ(net.layers()[0].weight(0, 0), 2.0 - 0.5 * 0.2);
}

TEST(SgdStep, NonFiniteGradientThrows) {
  DenseNet net = OneParam(1.0);
  SgdState state;
  EXPECT_THROW(SgdStep(net, Grad(std::nan(""), 0.0), 0.1, state, 0.0, 0.0),
               DivergenceError);
}

TrainConfig SmallConfig(double rho) {
  TrainConfig c;
  c.iterations = 60;
  c.log_interval = 7;
  c.batch_size = 16;
  c.hidden = {8};
  c.attack = AttackSpec{.radius = rho};
  c.seed = 5;
  return c;
}

struct Fixture {
  LabeledSet train = SynthBlobs(20, 3, 4, 0.8, 1);
  LabeledSet test = SynthBlobs(10, 3, 4, 0.8, 2);
};

TEST(TrainTwin, ZeroRadiusCollapse) {
  Fixture f;
  const RunLedger ledger = TrainTwin(f.train, f.test, SmallConfig(0.0));
  EXPECT_TRUE(ledger.erm == ledger.adv);
  for (const auto& r : ledger.records) {
    ASSERT_TRUE(r.i_hat.has_value());
    EXPECT_NEAR(*r.i_hat, 1.0, 1e-9);
    EXPECT_EQ(r.l_erm, r.l_adv);
  }
}

TEST(TrainTwin, RecordCountIsFloorTOverM) {
  Fixture f;
  const RunLedger ledger = TrainTwin(f.train, f.test, SmallConfig(0.1));
  EXPECT_EQ(ledger.records.size(), 60u / 7u);
  for (std::size_t i = 0; i < ledger.records.size(); ++i) {
    EXPECT_EQ(ledger.records[i].t, static_cast<int64_t>(7 * (i + 1)));
  }
}

TEST(TrainTwin, LockstepBatches) {
  Fixture f;
  const RunLedger ledger = TrainTwin(f.train, f.test, SmallConfig(0.1));
  for (const auto& r : ledger.records) EXPECT_EQ(r.erm_batch_hash, r.adv_batch_hash);
}

TEST(TrainTwin, SeedReplayIsBitwise) {
  Fixture f;
  const RunLedger a = TrainTwin(f.train, f.test, SmallConfig(0.1));
  const RunLedger b = TrainTwin(f.train, f.test, SmallConfig(0.1));
  EXPECT_EQ(a.records, b.records);
  EXPECT_TRUE(a.erm == b.erm);
  EXPECT_TRUE(a.adv == b.adv);
  EXPECT_EQ(a.feasibility.violations, 0u);
  EXPECT_GT(a.feasibility.checked, 0u);
}

TEST(TrainTwin, RejectsOversizedBatch) {
  Fixture f;
  TrainConfig c = SmallConfig(0.0);
  c.batch_size = 1000;
  EXPECT_THROW(TrainTwin(f.train, f.test, c), InvalidArgument);
}

TEST(TrainTwin, DivergenceKeepsPartialLedger) {
  Fixture f;
  TrainConfig c = SmallConfig(0.0);
  c.learning_rate.initial = 1e200;
  c.log_interval = 1;
  try {
    TrainTwin(f.train, f.test, c);
    FAIL() << "expected divergence";
  } catch (const TrainingDiverged& e) {
    EXPECT_TRUE(e.partial().diverged);
    EXPECT_FALSE(e.partial().records.empty());
  }
}

// Two iterations of a 1-D linear model, squared loss, on the two points
// x = 1 and x = -2 (target 0) with tau = N, traced by hand.
TEST(TrainTwin, TwoStepHandTrace) {
  Matrix x(2, 1);
  x << 1.0, -2.0;
  const LabeledSet train(x, {0, 0}, 1);
  TrainConfig c;
  c.iterations = 2;
  c.log_interval = 1;
  c.batch_size = 2;
  c.hidden = {};
  c.momentum = 0.0;
  c.weight_decay = 0.0;
  c.learning_rate = {.initial = 0.05, .decay_factor = 1.0, .decay_interval = 1};
  c.loss = LossSpec{.kind = LossKind::kSquared, .clip_m = 100.0};
  c.attack = AttackSpec{.norm = NormKind::kLinf, .radius = 0.2};
  c.seed = 3;
  const RunLedger ledger = TrainTwin(train, train, c);
  ASSERT_EQ(ledger.records.size(), 2u);

  const std::vector<int> widths = {1, 1};
  const Vector init = DenseNet::Initialize(widths, Activation::kRelu, 3).Flatten();
  const double xs[2] = {1.0, -2.0};

  // Per-example gradient of (w x + b)^2 is 2 r (x, 1) with r = w x + b.
  auto step = [&](double w, double b, double rho, double& max_norm,
                  double& mean_loss, double& gw, double& gb) {
    max_norm = 0.0;
    mean_loss = 0.0;
    gw = 0.0;
    gb = 0.0;
    for (double x0 : xs) {
      double xp = x0;
      if (rho > 0.0) {
        // Every sign step pushes |r| up, so PGD ends on the boundary.
        const double r0 = w * x0 + b;
        xp = x0 + rho * ((r0 * w > 0) ? 1.0 : -1.0);
      }
      const double r = w * xp + b;
      const double dw = 2.0 * r * xp, db = 2.0 * r;
      max_norm = std::max(max_norm, std::sqrt(dw * dw + db * db));
      mean_loss += r * r / 2.0;
      gw += dw / 2.0;
      gb += db / 2.0;
    }
  };

  double we = init(0), be = init(1), wa = init(0), ba = init(1);
  for (int t = 0; t < 2; ++t) {
    double le, loss_e, gwe, gbe, la, lossa, gwa, gba;
    step(we, be, 0.0, le, loss_e, gwe, gbe);
    step(wa, ba, 0.2, la, lossa, gwa, gba);
    const auto& r = ledger.records[t];
    EXPECT_EQ(r.t, t + 1);
    EXPECT_NEAR(r.l_erm, le, 1e-12);
    EXPECT_NEAR(r.l_adv, la, 1e-12);
    EXPECT_NEAR(r.loss_erm, loss_e, 1e-12);
    EXPECT_NEAR(r.loss_adv, lossa, 1e-12);
    EXPECT_NEAR(*r.i_hat, la / le, 1e-12);
    we -= 0.05 * gwe;
    be -= 0.05 * gbe;
    wa -= 0.05 * gwa;
    ba -= 0.05 * gba;
  }
  EXPECT_NEAR(ledger.erm.layers()[0].weight(0, 0), we, 1e-12);
  EXPECT_NEAR(ledger.adv.layers()[0].bias(0), ba, 1e-12);
}

TEST(Checkpoint, RoundTripIsBitwise) {
  const DenseNet net = DenseNet::Initialize(std::vector<int>{5, 7, 3}, Activation::kTanh, 11);
  const fs::path path = TempPath("rt.ckpt");
  SaveCheckpoint(net, path);
  EXPECT_TRUE(LoadCheckpoint(path) == net);
}

TEST(Checkpoint, LayoutStartsWithMagic) {
  const DenseNet net = DenseNet::Initialize(std::vector<int>{2, 3}, Activation::kRelu, 1);
  const fs::path path = TempPath("layout.ckpt");
  SaveCheckpoint(net, path);
  // magic + activation + L + 2 widths + count + 9 doubles.
  EXPECT_EQ(fs::file_size(path), 4u + 4 + 4 + 2 * 4 + 8 + 9 * 8);
  std::ifstream in(path, std::ios::binary);
  char magic[4];
  in.read(magic, 4);
  EXPECT_EQ(std::string(magic, 4), "RPG1");
}

TEST(Checkpoint, TruncatedFileThrows) {
  const DenseNet net = DenseNet::Initialize(std::vector<int>{4, 3}, Activation::kRelu, 2);
  const fs::path path = TempPath("trunc.ckpt");
  SaveCheckpoint(net, path);
  fs::resize_file(path, fs::file_size(path) - 5);
  EXPECT_THROW(LoadCheckpoint(path), ParseError);
}

TEST(Checkpoint, BadMagicThrows) {
  const fs::path path = TempPath("magic.ckpt");
  std::ofstream(path, std::ios::binary) << "XXXX0000000000000000";
  EXPECT_THROW(LoadCheckpoint(path), ParseError);
}

TEST(Checkpoint, CountMismatchThrows) {
  const DenseNet net = DenseNet::Initialize(std::vector<int>{2, 3}, Activation::kRelu, 1);
  const fs::path path = TempPath("count.ckpt");
  SaveCheckpoint(net, path);
  {
    std::fstream f(path, std::ios::binary | std::ios::in | std::ios::out);
    f.seekp(4 + 4 + 4 + 2 * 4);
    const uint64_t wrong = 8;
    f.write(reinterpret_cast<const char*>(&wrong), sizeof(wrong));
  }
  EXPECT_THROW(LoadCheckpoint(path), ParseError);
}

TEST(Checkpoint, MissingFileThrows) {
  EXPECT_THROW(LoadCheckpoint(TempPath("absent.ckpt")), IoError);
}

TEST(LedgerCsv, RoundTrip) {
  Fixture f;
  const RunLedger ledger = TrainTwin(f.train, f.test, SmallConfig(0.1));
  const fs::path path = TempPath("ledger.csv");
  WriteLedgerCsv(ledger.records, path);
  EXPECT_EQ(ReadLedgerCsv(path), ledger.records);
}

TEST(LedgerCsv, MalformedRowNamesLine) {
  const fs::path path = TempPath("bad_ledger.csv");
  std::ofstream(path) << "t,l_erm,l_adv,i_hat,loss_erm,loss_adv,erm_batch_hash,"
                         "adv_batch_hash,eps_t\n1,2,3,,4,5,6,7,\n2,x,3,,4,5,6,7,\n";
  try {
    ReadLedgerCsv(path);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find(":3"), std::string::npos);
  }
}

}  // namespace
}  // namespace rpg
