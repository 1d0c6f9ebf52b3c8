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

#ifndef RPG_TRAINING_H_
#define RPG_TRAINING_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rpg/adversarial.h"
#include "rpg/data.h"
#include "rpg/errors.h"
#include "rpg/nn.h"

namespace rpg {

// Step decay: eta_t = initial * decay_factor^floor((t - 1) / decay_interval).
struct LearningRateSchedule {
  double initial = 0.1;
  double decay_factor = 0.1;
  int64_t decay_interval = 1000;

  double At(int64_t t) const;
};

struct TrainConfig {
  int64_t iterations = 2000;
  LearningRateSchedule learning_rate;
  double momentum = 0.9;
  double weight_decay = 2e-4;
  std::size_t batch_size = 128;
  int64_t log_interval = 20;
  std::vector<int> hidden = {64, 64};
  Activation activation = Activation::kRelu;
  AttackSpec attack;
  LossSpec loss;
  uint64_t seed = 0;

  // Throws InvalidArgument on T < 1, m < 1, batch size 0 or a bad attack.
  void Validate() const;
};

// Heavy-ball momentum buffer.
struct SgdState {
  Vector velocity;
};

// g' = g + weight_decay * theta;  v <- momentum * v + g';  theta <- theta - lr * v.
// Throws DivergenceError when the gradient has a non-finite entry.
void SgdStep(DenseNet& net, const GradVector& grad, double learning_rate,
             SgdState& state, double momentum, double weight_decay);

// One logged iteration of a twin run. l_erm / l_adv are the largest
// per-example gradient norms over the iteration's batch, measured at the ERM
// and adversarial iterates before that iteration's update.
struct IterationRecord {
  int64_t t = 0;
  double l_erm = 0.0;
  double l_adv = 0.0;
  // Empty when l_erm is degenerate (see SingleIntensity).
  std::optional<double> i_hat;
  double loss_erm = 0.0;
  double loss_adv = 0.0;
  uint64_t erm_batch_hash = 0;
  uint64_t adv_batch_hash = 0;

  bool operator==(const IterationRecord&) const = default;
};

struct RunLedger {
  TrainConfig config;
  std::vector<IterationRecord> records;
  DenseNet erm;
  DenseNet adv;
  double erm_train_accuracy = 0.0;
  double erm_test_accuracy = 0.0;
  double adv_train_accuracy = 0.0;
  double adv_test_accuracy = 0.0;
  FeasibilityCounter feasibility;
  bool diverged = false;
  std::string divergence_message;
};

// Thrown by TrainTwin on a non-finite loss; carries everything logged so far.
class TrainingDiverged : public DivergenceError {
 public:
  TrainingDiverged(const std::string& what, RunLedger partial)
      : DivergenceError(what), partial_(std::move(partial)) {}
  const RunLedger& partial() const { return partial_; }

 private:
  RunLedger partial_;
};

// Trains an ERM model and an adversarial model in lockstep. Both start from
// DenseNet::Initialize(seed) and draw batches from their own copy of
// BatchSchedule{seed, batch_size}; record hashes let callers confirm the
// index sequences agree. Every log_interval iterations an IterationRecord is
// appended, so a complete ledger holds floor(T / m) records.
RunLedger TrainTwin(const LabeledSet& train, const LabeledSet& test,
                    const TrainConfig& config);

// Checkpoint layout (little-endian):
//   "RPG1" | u32 activation | u32 layer count L | u32 widths[L + 1]
//   | u64 parameter count | f64 parameters[count] (flattened order)
void SaveCheckpoint(const DenseNet& net, const std::filesystem::path& path);
DenseNet LoadCheckpoint(const std::filesystem::path& path);

// Ledger CSV, one row per IterationRecord. eps_t is written when supplied
// (one value per record) and left empty otherwise.
void WriteLedgerCsv(const std::vector<IterationRecord>& records,
                    const std::filesystem::path& path,
                    const std::vector<std::optional<double>>& eps = {});
std::vector<IterationRecord> ReadLedgerCsv(const std::filesystem::path& path);

}  // namespace rpg

#endif  // RPG_TRAINING_H_
