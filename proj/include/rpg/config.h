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

#ifndef RPG_CONFIG_H_
#define RPG_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "rpg/adversarial.h"
#include "rpg/training.h"

namespace rpg {

// Raised for unknown keys, unparsable values and invariant violations.
// The CLI maps it to exit status 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DataConfig {
  std::string source = "synthetic";  // "synthetic" | "csv"
  std::string train_csv;
  std::string test_csv;
  bool csv_header = false;
  int num_classes = 4;
  int dim = 20;
  double spread = 0.35;
  std::size_t n_train = 2000;
  std::size_t n_test = 2000;
  uint64_t seed = 7;
};

struct ExperimentConfig {
  DataConfig data;
  TrainConfig train;                 // attack.radius is set per run
  std::vector<double> rhos;          // sorted ascending, contains 0
  std::vector<uint64_t> seeds = {1, 2, 3};
  double step_fraction = 0.25;       // PGD step = fraction * rho
  double delta_prime = 1.0;
  std::size_t noise_batches = 50;
  std::size_t noise_components = 1000;
  double bound_c = 1.0;
  std::vector<double> gammas = {0.05};
  int polyfit_degree = 4;
  int workers = 0;                   // 0 = hardware concurrency
  std::string output_dir = "runs";

  // Default desk-scale experiment.
  static ExperimentConfig Defaults();
  // Throws ConfigError on a violated invariant.
  void Validate() const;
  AttackSpec AttackFor(double rho) const;
};

// Flat "section.key = value" text, '#' starts a comment, lists are comma
// separated. Keys not present keep their defaults.
ExperimentConfig ParseConfig(const std::string& text);
ExperimentConfig LoadConfig(const std::filesystem::path& path);
// Every key, in a fixed order, with round-trip exact numbers.
std::string SerializeConfig(const ExperimentConfig& config);

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

}  // namespace rpg

#endif  // RPG_CONFIG_H_
