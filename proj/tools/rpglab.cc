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

// rpglab: command-line front end for the lab.
//
// Exit status: 0 success, 1 run failure, 2 configuration or input error.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rpg/analysis.h"
#include "rpg/bounds.h"
#include "rpg/config.h"
#include "rpg/errors.h"
#include "rpg/experiment.h"
#include "rpg/intensity.h"
#include "rpg/membership.h"
#include "rpg/privacy.h"
#include "rpg/training.h"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitRunFailure = 1;
constexpr int kExitConfig = 2;

struct ConfigFlags {
  std::string path;
  std::vector<std::string> overrides;

  void Attach(CLI::App* app) {
    app->add_option("-c,--config", path, "Config file (defaults when omitted)");
    app->add_option("-s,--set", overrides, "Override, e.g. train.iterations=200");
  }

  rpg::ExperimentConfig Load() const {
    std::string text;
    if (!path.empty()) {
      std::ifstream in(path);
      if (!in) throw rpg::ConfigError("cannot open config " + path);
      std::stringstream buffer;
      buffer << in.rdbuf();
      text = buffer.str();
    }
    for (const auto& o : overrides) text += "\n" + o;
    rpg::ExperimentConfig config = rpg::ParseConfig(text);
    config.Validate();
    return config;
  }
};

void PrintJson(const json& j) { std::cout << j.dump(2) << "\n"; }

std::vector<double> ReadEpsColumn(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw rpg::IoError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  std::vector<double> eps;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(line, &used);
    } catch (const std::logic_error&) {
      used = 0;
    }
    if (used == 0 || line.find_first_not_of(" \t\r", used) != std::string::npos) {
      throw rpg::ParseError(path.string() + ":" + std::to_string(line_no) +
                            ": malformed epsilon value");
    }
    eps.push_back(value);
  }
  return eps;
}

std::string FirstLine(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw rpg::IoError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

struct AccountantArgs {
  std::string series;
  std::vector<double> eps;
  double n = 0.0;
  double b = 0.0;
  double delta_prime = 1.0;
  int64_t repeat = 1;
  std::optional<double> l_erm;
  std::optional<double> intensity;
  std::optional<double> iterations;
};

int RunAccountant(const AccountantArgs& args) {
  std::vector<double> per_step;
  std::optional<double> l_erm = args.l_erm, intensity = args.intensity;
  std::optional<double> iterations = args.iterations;
  if (!args.series.empty()) {
    const std::string header = FirstLine(args.series);
    if (header == "eps") {
      for (double e : ReadEpsColumn(args.series)) {
        for (int64_t k = 0; k < args.repeat; ++k) per_step.push_back(e);
      }
    } else if (header.rfind("t,l_erm,l_adv,i_hat", 0) == 0) {
      if (!(args.b > 0.0)) throw rpg::ConfigError("accountant: ledger series needs --b");
      const auto records = rpg::ReadLedgerCsv(args.series);
      for (const auto& r : records) {
        if (!r.i_hat) continue;
        const double e = rpg::PerStepEpsilon(r.l_erm, *r.i_hat, args.n, args.b);
        for (int64_t k = 0; k < args.repeat; ++k) per_step.push_back(e);
      }
      const auto summary = rpg::SummarizeIntensity(records);
      if (!l_erm) l_erm = summary.l_erm_composite;
      if (!intensity) intensity = summary.composite;
      if (!iterations) {
        iterations = static_cast<double>(records.size()) * static_cast<double>(args.repeat);
      }
    } else {
      throw rpg::ParseError(args.series + ":1: expected header 'eps' or a ledger header");
    }
  }
  for (double e : args.eps) per_step.push_back(e);

  json out;
  out["composed"] = rpg::BudgetJson(rpg::Compose(per_step, args.delta_prime, args.n));
  if (l_erm && intensity && args.b > 0.0) {
    const double t = iterations.value_or(static_cast<double>(per_step.size()));
    if (t < 1.0) {
      rpg::PrivacyBudget zero;
      zero.delta = args.delta_prime / args.n;
      zero.inputs = {.n = args.n,
                     .laplace_scale = args.b,
                     .delta_prime = args.delta_prime,
                     .l_erm_composite = *l_erm,
                     .intensity_composite = *intensity};
      zero.provenance = rpg::Provenance::kLeading;
      out["leading"] = rpg::BudgetJson(zero);
      zero.provenance = rpg::Provenance::kErmBaseline;
      out["erm_baseline"] = rpg::BudgetJson(zero);
    } else {
      out["leading"] = rpg::BudgetJson(
          rpg::LeadingEpsilon(*l_erm, *intensity, t, args.n, args.b, args.delta_prime));
      out["erm_baseline"] =
          rpg::BudgetJson(rpg::ErmEpsilon(*l_erm, t, args.n, args.b, args.delta_prime));
    }
  } else {
    out["leading"] = nullptr;
    out["erm_baseline"] = nullptr;
  }
  PrintJson(out);
  return kExitOk;
}

rpg::ExperimentData DataFor(const rpg::ExperimentConfig& config) {
  return rpg::LoadExperimentData(config);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rpglab: robustified intensity, privacy and generalization lab"};
  app.require_subcommand(1);

  ConfigFlags defaults_flags;
  auto* defaults = app.add_subcommand("defaults", "Print the effective config");
  defaults_flags.Attach(defaults);

  ConfigFlags train_flags;
  double train_rho = 0.0;
  uint64_t train_seed = 1;
  auto* train = app.add_subcommand("train", "Twin ERM/adversarial run for one (rho, seed)");
  train_flags.Attach(train);
  train->add_option("--rho", train_rho, "Attack radius")->required();
  train->add_option("--seed", train_seed, "Run seed");

  ConfigFlags sweep_flags;
  auto* sweep = app.add_subcommand("sweep", "All (rho, seed) runs plus analysis");
  sweep_flags.Attach(sweep);

  AccountantArgs acc;
  auto* accountant = app.add_subcommand("accountant", "Privacy budget calculator");
  accountant->add_option("--series", acc.series, "CSV: 'eps' column or a run ledger");
  accountant->add_option("--eps", acc.eps, "Per-step epsilons (appended to the series)")
      ->delimiter(',');
  accountant->add_option("--n", acc.n, "Training set size")->required();
  accountant->add_option("--b", acc.b, "Laplace scale");
  accountant->add_option("--delta-prime", acc.delta_prime, "delta'");
  accountant->add_option("--repeat", acc.repeat, "Iterations represented by each row")
      ->check(CLI::PositiveNumber);
  accountant->add_option("--l-erm", acc.l_erm, "Composite clean gradient norm");
  accountant->add_option("--intensity", acc.intensity, "Composite intensity");
  accountant->add_option("--iterations", acc.iterations, "T for the leading term");

  double b_eps = 0.0, b_delta = 0.0, b_m = 10.0, b_n = 0.0, b_c = 1.0;
  std::vector<double> b_gammas = {0.05};
  auto* bounds = app.add_subcommand("bounds", "Stability and generalization bounds");
  bounds->add_option("--eps", b_eps)->required();
  bounds->add_option("--delta", b_delta)->required();
  bounds->add_option("--m", b_m, "Loss bound M");
  bounds->add_option("--n", b_n)->required();
  bounds->add_option("--gamma", b_gammas)->delimiter(',');
  bounds->add_option("--c", b_c);

  ConfigFlags attack_flags;
  std::string attack_ckpt, attack_csv;
  auto* attack = app.add_subcommand("attack", "Membership inference on a checkpoint");
  attack_flags.Attach(attack);
  attack->add_option("--checkpoint", attack_ckpt)->required();
  attack->add_option("--sweep-csv", attack_csv, "Write (zeta, accuracy) rows");

  ConfigFlags noise_flags;
  std::string noise_ckpt, noise_csv;
  double noise_rho = 0.0;
  uint64_t noise_seed = 1;
  auto* noise = app.add_subcommand("noise", "Gradient noise histogram and Laplace fit");
  noise_flags.Attach(noise);
  noise->add_option("--checkpoint", noise_ckpt)->required();
  noise->add_option("--rho", noise_rho, "Attack radius for gradients");
  noise->add_option("--seed", noise_seed);
  noise->add_option("--histogram", noise_csv, "Histogram CSV output");

  ConfigFlags probe_flags;
  std::string probe_erm, probe_adv, probe_csv;
  double probe_rho = 0.0;
  uint64_t probe_seed = 1;
  int probe_repeats = 20;
  std::vector<std::size_t> probe_sizes;
  auto* probe = app.add_subcommand("probe", "Intensity consistency probe");
  probe_flags.Attach(probe);
  probe->add_option("--erm", probe_erm)->required();
  probe->add_option("--adv", probe_adv)->required();
  probe->add_option("--rho", probe_rho);
  probe->add_option("--seed", probe_seed);
  probe->add_option("--repeats", probe_repeats)->check(CLI::PositiveNumber);
  probe->add_option("--batch-sizes", probe_sizes)->delimiter(',');
  probe->add_option("--out", probe_csv, "Probe CSV output");

  std::string report_dir;
  int report_degree = 4;
  auto* report = app.add_subcommand("report", "Re-analyze a sweep directory");
  report->add_option("--dir", report_dir)->required();
  report->add_option("--degree", report_degree);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*defaults) {
      std::cout << rpg::SerializeConfig(defaults_flags.Load());
      return kExitOk;
    }
    if (*train) {
      const auto config = train_flags.Load();
      const auto data = DataFor(config);
      const auto result = rpg::TrainAndPersist(config, data, train_rho, train_seed);
      std::cout << (rpg::RunDirectory(config, train_rho, train_seed) / "summary.json").string()
                << "\n";
      std::printf("intensity %.6g  eps_leading %.6g  mia %.4f  gen_gap %.4f\n",
                  result.row.intensity, result.row.eps_leading,
                  result.row.attack_accuracy, result.row.gen_gap);
      return kExitOk;
    }
    if (*sweep) {
      const auto outcome = rpg::RunSweep(sweep_flags.Load());
      std::printf("%zu runs (%zu resumed), %zu failures\n", outcome.rows.size(),
                  outcome.resumed, outcome.failures.size());
      for (const auto& f : outcome.failures) std::fprintf(stderr, "failed: %s\n", f.c_str());
      std::cout << outcome.analysis["spearman"].dump(2) << "\n";
      return outcome.failures.empty() ? kExitOk : kExitRunFailure;
    }
    if (*accountant) return RunAccountant(acc);
    if (*bounds) {
      json out = json::array();
      for (double gamma : b_gammas) {
        const auto r = rpg::MakeBoundReport(b_eps, b_delta, b_m, b_n, gamma, b_c);
        out.push_back({{"gamma", gamma},
                       {"beta", r.beta},
                       {"on_avg_bound", r.on_avg_bound},
                       {"high_prob_bound", r.high_prob_bound},
                       {"high_prob_bound_normalized", r.high_prob_bound_normalized}});
      }
      PrintJson(out);
      return kExitOk;
    }
    if (*attack) {
      const auto data = DataFor(attack_flags.Load());
      const auto net = rpg::LoadCheckpoint(attack_ckpt);
      const auto r = rpg::OptimalThreshold(rpg::TrueLabelConfidences(net, data.train),
                                           rpg::TrueLabelConfidences(net, data.test));
      if (!attack_csv.empty()) rpg::WriteAttackSweepCsv(r, attack_csv);
      PrintJson({{"accuracy", r.accuracy},
                 {"zeta_optim", r.zeta_optim},
                 {"gen_gap", rpg::GeneralizationGap(net, data.train, data.test)}});
      return kExitOk;
    }
    if (*noise) {
      const auto config = noise_flags.Load();
      const auto data = DataFor(config);
      const auto net = rpg::LoadCheckpoint(noise_ckpt);
      rpg::NoiseOptions options{.batch_size = config.train.batch_size,
                                .batches = config.noise_batches,
                                .components_per_batch = config.noise_components,
                                .seed = noise_seed,
                                .attack = config.AttackFor(noise_rho),
                                .loss = config.train.loss};
      const auto sample = rpg::CollectNoise(net, data.train, options);
      const auto fit = rpg::FitLaplace(sample.values);
      if (!noise_csv.empty()) {
        rpg::WriteHistogramCsv(rpg::MakeHistogram(sample.values), noise_csv);
      }
      PrintJson({{"samples", sample.values.size()},
                 {"divisor", sample.divisor},
                 {"laplace_location", fit.location},
                 {"laplace_scale", fit.scale},
                 {"excess_kurtosis", rpg::ExcessKurtosis(sample.values)}});
      return kExitOk;
    }
    if (*probe) {
      const auto config = probe_flags.Load();
      const auto data = DataFor(config);
      const auto erm = rpg::LoadCheckpoint(probe_erm);
      const auto adv = rpg::LoadCheckpoint(probe_adv);
      if (probe_sizes.empty()) {
        const std::size_t n = data.train.size();
        probe_sizes = {n / 16, n / 8, n / 4, n / 2, n};
      }
      const auto table =
          rpg::ConsistencyProbe(erm, adv, data.train, config.AttackFor(probe_rho),
                                config.train.loss, probe_sizes, probe_repeats, probe_seed);
      if (!probe_csv.empty()) rpg::WriteProbeCsv(table, probe_csv);
      json rows = json::array();
      for (const auto& r : table.rows) {
        rows.push_back({{"batch_size", r.batch_size},
                        {"mean_estimate", r.mean_estimate},
                        {"abs_error", std::abs(r.mean_estimate - table.full_value)}});
      }
      PrintJson({{"full_value", table.full_value}, {"rows", rows}});
      return kExitOk;
    }
    if (*report) {
      auto rows = rpg::ReadSweepCsv(fs::path(report_dir) / "sweep.csv");
      rpg::SortSweep(rows);
      PrintJson(rpg::AnalyzeSweep(rows, report_degree));
      return kExitOk;
    }
  } catch (const rpg::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const rpg::ParseError& e) {
    std::fprintf(stderr, "parse error: %s\n", e.what());
    return kExitConfig;
  } catch (const rpg::InvalidArgument& e) {
    std::fprintf(stderr, "invalid argument: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRunFailure;
  }
  return kExitOk;
}
