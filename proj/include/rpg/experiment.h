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

#ifndef RPG_EXPERIMENT_H_
#define RPG_EXPERIMENT_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rpg/analysis.h"
#include "rpg/bounds.h"
#include "rpg/config.h"
#include "rpg/data.h"
#include "rpg/intensity.h"
#include "rpg/membership.h"
#include "rpg/privacy.h"
#include "rpg/training.h"

#include "json.hpp"

namespace rpg {

struct ExperimentData {
  LabeledSet train;
  LabeledSet test;
};

// Synthetic blobs split into train/test, or the two configured CSV files.
ExperimentData LoadExperimentData(const ExperimentConfig& config);

// Everything one (rho, seed) run produces.
struct RunResult {
  RunLedger ledger;
  IntensitySeries intensity;
  NoiseSample noise;
  LaplaceFit laplace;
  double noise_kurtosis = 0.0;
  std::vector<std::optional<double>> eps_series;
  PrivacyBudget composed;
  PrivacyBudget leading;
  PrivacyBudget erm_baseline;
  std::vector<BoundReport> bounds;  // one per gamma
  AttackReport attack;              // membership attack on the adversarial model
  AttackReport erm_attack;
  double gen_gap = 0.0;
  double erm_gen_gap = 0.0;
  double adv_accuracy = 0.0;
  SweepRow row;
};

// Train twin models, then intensity, gradient noise and Laplace fit, privacy
// budgets, bounds, membership attack, generalization gaps and adversarial
// accuracy. Pure computation; nothing is written.
RunResult RunPipeline(const ExperimentConfig& config, const ExperimentData& data,
                      double rho, uint64_t seed);

// <output_dir>/rho=<rho>/seed=<seed>
std::filesystem::path RunDirectory(const ExperimentConfig& config, double rho,
                                   uint64_t seed);

// Writes ledger.csv, erm.ckpt, adv.ckpt, noise_hist.csv, mia_sweep.csv and
// summary.json into `dir` (created if missing); run start/end times go to the
// separate meta.json.
void WriteRunArtifacts(const RunResult& result, const std::filesystem::path& dir);
nlohmann::json RunSummaryJson(const RunResult& result);

// Runs one (rho, seed) pair end to end and persists it. A diverged run leaves
// a partial ledger and a summary with "diverged": true, then rethrows.
RunResult TrainAndPersist(const ExperimentConfig& config,
                          const ExperimentData& data, double rho,
                          uint64_t seed);

// A summary.json with "complete": true marks a finished run.
bool RunComplete(const std::filesystem::path& dir);
SweepRow RowFromSummary(const std::filesystem::path& dir);

struct SweepOutcome {
  std::vector<SweepRow> rows;
  std::vector<std::string> failures;
  std::size_t resumed = 0;
  nlohmann::json analysis;
};

// Every (rho, seed) pair on a worker pool; completed runs are reused. Writes
// sweep.csv and analysis.json under output_dir.
SweepOutcome RunSweep(const ExperimentConfig& config);

// Spearman correlations and polynomial fits over a sweep table.
nlohmann::json AnalyzeSweep(const std::vector<SweepRow>& rows, int degree);

nlohmann::json BudgetJson(const PrivacyBudget& budget);

}  // namespace rpg

#endif  // RPG_EXPERIMENT_H_
