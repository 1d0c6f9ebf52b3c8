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

#include "rpg/experiment.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <mutex>
#include <thread>

#include "rpg/errors.h"

namespace rpg {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string FormatRho(double rho) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", rho);
  return buf;
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

json BoxStats(std::vector<double> values) {
  if (values.empty()) return json::object();
  std::sort(values.begin(), values.end());
  auto quantile = [&](double q) {
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  return {{"min", values.front()}, {"q1", quantile(0.25)},
          {"median", quantile(0.5)}, {"q3", quantile(0.75)},
          {"max", values.back()}};
}

std::string Timestamp() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

json AttackJson(const AttackReport& report) {
  return {{"accuracy", report.accuracy},
          {"zeta_optim", report.zeta_optim},
          {"train_size", report.train_size},
          {"test_size", report.test_size}};
}

json RowJson(const SweepRow& r) {
  return {{"rho", r.rho},
          {"seed", r.seed},
          {"intensity", r.intensity},
          {"adv_accuracy", r.adv_accuracy},
          {"attack_accuracy", r.attack_accuracy},
          {"gen_gap", r.gen_gap},
          {"eps_leading", r.eps_leading},
          {"on_avg_bound", r.on_avg_bound},
          {"high_prob_bound", r.high_prob_bound},
          {"eps_composed", r.eps_composed},
          {"eps_erm", r.eps_erm},
          {"laplace_scale", r.laplace_scale},
          {"erm_attack_accuracy", r.erm_attack_accuracy},
          {"erm_gen_gap", r.erm_gen_gap},
          {"pgd_checked", r.pgd_checked},
          {"pgd_violations", r.pgd_violations}};
}

SweepRow RowFromJson(const json& j) {
  SweepRow r;
  r.rho = j.at("rho");
  r.seed = j.at("seed");
  r.intensity = j.at("intensity");
  r.adv_accuracy = j.at("adv_accuracy");
  r.attack_accuracy = j.at("attack_accuracy");
  r.gen_gap = j.at("gen_gap");
  r.eps_leading = j.at("eps_leading");
  r.on_avg_bound = j.at("on_avg_bound");
  r.high_prob_bound = j.at("high_prob_bound");
  r.eps_composed = j.at("eps_composed");
  r.eps_erm = j.at("eps_erm");
  r.laplace_scale = j.at("laplace_scale");
  r.erm_attack_accuracy = j.at("erm_attack_accuracy");
  r.erm_gen_gap = j.at("erm_gen_gap");
  r.pgd_checked = j.at("pgd_checked");
  r.pgd_violations = j.at("pgd_violations");
  return r;
}

}  // namespace

json BudgetJson(const PrivacyBudget& budget) {
  return {{"epsilon", budget.epsilon},
          {"delta", budget.delta},
          {"provenance", ProvenanceName(budget.provenance)},
          {"inputs",
           {{"n", budget.inputs.n},
            {"b", budget.inputs.laplace_scale},
            {"iterations", budget.inputs.iterations},
            {"delta_prime", budget.inputs.delta_prime},
            {"l_erm_composite", budget.inputs.l_erm_composite},
            {"intensity_composite", budget.inputs.intensity_composite},
            {"sum_eps", budget.inputs.sum_eps},
            {"sum_eps_sq", budget.inputs.sum_eps_sq}}}};
}

ExperimentData LoadExperimentData(const ExperimentConfig& config) {
  if (config.data.source == "csv") {
    return {LoadCsv(config.data.train_csv, config.data.csv_header),
            LoadCsv(config.data.test_csv, config.data.csv_header)};
  }
  const auto& d = config.data;
  const std::size_t total = d.n_train + d.n_test;
  const LabeledSet all =
      SynthBlobs(static_cast<int>(total / static_cast<std::size_t>(d.num_classes)),
                 d.num_classes, d.dim, d.spread, d.seed);
  auto split = SplitTrainTest(all, d.n_train, d.seed);
  return {std::move(split.train), std::move(split.test)};
}

RunResult RunPipeline(const ExperimentConfig& config, const ExperimentData& data,
                      double rho, uint64_t seed) {
  TrainConfig train = config.train;
  train.attack = config.AttackFor(rho);
  train.seed = seed;
  const double n = static_cast<double>(data.train.size());

  RunResult result{.ledger = TrainTwin(data.train, data.test, train)};
  const RunLedger& ledger = result.ledger;
  result.intensity = SummarizeIntensity(ledger.records);

  NoiseOptions noise{.batch_size = train.batch_size,
                     .batches = config.noise_batches,
                     .components_per_batch = config.noise_components,
                     .seed = seed,
                     .attack = train.attack,
                     .loss = train.loss};
  FeasibilityCounter feasibility = ledger.feasibility;
  result.noise = CollectNoise(ledger.adv, data.train, noise);
  result.noise.iteration = train.iterations;
  result.noise.model_tag = "adv";
  result.laplace = FitLaplace(result.noise.values);
  result.noise_kurtosis = ExcessKurtosis(result.noise.values);
  const double b = result.laplace.scale;

  // Each logged record stands for the log_interval iterations it samples.
  std::vector<double> per_step;
  for (const auto& record : ledger.records) {
    if (record.i_hat) {
      const double eps = PerStepEpsilon(record.l_erm, *record.i_hat, n, b);
      result.eps_series.emplace_back(eps);
      for (int64_t k = 0; k < train.log_interval; ++k) per_step.push_back(eps);
    } else {
      result.eps_series.emplace_back(std::nullopt);
    }
  }
  result.composed = Compose(per_step, config.delta_prime, n);
  result.composed.inputs.laplace_scale = b;
  const double iterations = static_cast<double>(train.iterations);
  result.leading =
      LeadingEpsilon(result.intensity.l_erm_composite, result.intensity.composite,
                     iterations, n, b, config.delta_prime);
  result.erm_baseline = ErmEpsilon(result.intensity.l_erm_composite, iterations,
                                   n, b, config.delta_prime);
  for (double gamma : config.gammas) {
    result.bounds.push_back(MakeBoundReport(result.leading.epsilon,
                                            result.leading.delta,
                                            train.loss.clip_m, n, gamma,
                                            config.bound_c));
  }

  result.attack = OptimalThreshold(TrueLabelConfidences(ledger.adv, data.train),
                                   TrueLabelConfidences(ledger.adv, data.test));
  result.erm_attack =
      OptimalThreshold(TrueLabelConfidences(ledger.erm, data.train),
                       TrueLabelConfidences(ledger.erm, data.test));
  result.gen_gap = ledger.adv_train_accuracy - ledger.adv_test_accuracy;
  result.erm_gen_gap = ledger.erm_train_accuracy - ledger.erm_test_accuracy;
  result.adv_accuracy = AdversarialAccuracy(ledger.adv, data.test, train.attack,
                                            train.loss, &feasibility);

  SweepRow& row = result.row;
  row.rho = rho;
  row.seed = seed;
  row.intensity = result.intensity.composite;
  row.adv_accuracy = result.adv_accuracy;
  row.attack_accuracy = result.attack.accuracy;
  row.gen_gap = result.gen_gap;
  row.eps_leading = result.leading.epsilon;
  row.on_avg_bound = result.bounds.front().on_avg_bound;
  row.high_prob_bound = result.bounds.front().high_prob_bound;
  row.eps_composed = result.composed.epsilon;
  row.eps_erm = result.erm_baseline.epsilon;
  row.laplace_scale = b;
  row.erm_attack_accuracy = result.erm_attack.accuracy;
  row.erm_gen_gap = result.erm_gen_gap;
  row.pgd_checked = feasibility.checked;
  row.pgd_violations = feasibility.violations;
  result.ledger.feasibility = feasibility;
  return result;
}

fs::path RunDirectory(const ExperimentConfig& config, double rho,
                      uint64_t seed) {
  return fs::path(config.output_dir) / ("rho=" + FormatRho(rho)) /
         ("seed=" + std::to_string(seed));
}

json RunSummaryJson(const RunResult& result) {
  const RunLedger& ledger = result.ledger;
  std::vector<double> l_erm, l_adv;
  for (const auto& r : ledger.records) {
    l_erm.push_back(r.l_erm);
    l_adv.push_back(r.l_adv);
  }
  json bounds = json::array();
  for (const auto& b : result.bounds) {
    bounds.push_back({{"gamma", b.gamma},
                      {"c", b.c},
                      {"loss_bound", b.loss_bound},
                      {"beta", b.beta},
                      {"on_avg_bound", b.on_avg_bound},
                      {"high_prob_bound", b.high_prob_bound},
                      {"high_prob_bound_normalized", b.high_prob_bound_normalized}});
  }
  return {
      {"complete", true},
      {"diverged", false},
      {"rho", result.row.rho},
      {"seed", result.row.seed},
      {"records", ledger.records.size()},
      {"parameter_count", ledger.adv.ParameterCount()},
      {"intensity",
       {{"composite", result.intensity.composite},
        {"l_erm_composite", result.intensity.l_erm_composite},
        {"skipped_records", result.intensity.skipped}}},
      {"gradient_norms", {{"erm", BoxStats(l_erm)}, {"adv", BoxStats(l_adv)}}},
      {"noise",
       {{"model", result.noise.model_tag},
        {"samples", result.noise.values.size()},
        {"divisor", result.noise.divisor},
        {"excess_kurtosis", result.noise_kurtosis},
        {"laplace_location", result.laplace.location},
        {"laplace_scale", result.laplace.scale},
        {"laplace_scale_gradient_units",
         result.laplace.scale * result.noise.divisor}}},
      {"privacy",
       {{"composed", BudgetJson(result.composed)},
        {"leading", BudgetJson(result.leading)},
        {"erm_baseline", BudgetJson(result.erm_baseline)}}},
      {"bounds", bounds},
      {"membership",
       {{"adv", AttackJson(result.attack)}, {"erm", AttackJson(result.erm_attack)}}},
      {"accuracy",
       {{"erm_train", ledger.erm_train_accuracy},
        {"erm_test", ledger.erm_test_accuracy},
        {"adv_train", ledger.adv_train_accuracy},
        {"adv_test", ledger.adv_test_accuracy},
        {"adv_robust_test", result.adv_accuracy}}},
      {"gen_gap", {{"adv", result.gen_gap}, {"erm", result.erm_gen_gap}}},
      {"pgd_feasibility",
       {{"checked", ledger.feasibility.checked},
        {"violations", ledger.feasibility.violations},
        {"worst_excess", ledger.feasibility.worst_excess}}},
      {"row", RowJson(result.row)}};
}

void WriteRunArtifacts(const RunResult& result, const fs::path& dir) {
  fs::create_directories(dir);
  WriteLedgerCsv(result.ledger.records, dir / "ledger.csv", result.eps_series);
  SaveCheckpoint(result.ledger.erm, dir / "erm.ckpt");
  SaveCheckpoint(result.ledger.adv, dir / "adv.ckpt");
  WriteHistogramCsv(MakeHistogram(result.noise.values), dir / "noise_hist.csv");
  WriteAttackSweepCsv(result.attack, dir / "mia_sweep.csv");
  WriteText(dir / "summary.json", RunSummaryJson(result).dump(2) + "\n");
}

RunResult TrainAndPersist(const ExperimentConfig& config,
                          const ExperimentData& data, double rho,
                          uint64_t seed) {
  const fs::path dir = RunDirectory(config, rho, seed);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  const std::string started = Timestamp();
  try {
    RunResult result = RunPipeline(config, data, rho, seed);
    WriteRunArtifacts(result, dir);
    WriteText(dir / "meta.json",
              json{{"started", started}, {"finished", Timestamp()}}.dump(2) + "\n");
    return result;
  } catch (const TrainingDiverged& e) {
    WriteLedgerCsv(e.partial().records, dir / "ledger.csv");
    WriteText(dir / "summary.json",
              json{{"complete", false},
                   {"diverged", true},
                   {"message", e.what()},
                   {"rho", rho},
                   {"seed", seed},
                   {"records", e.partial().records.size()}}
                      .dump(2) + "\n");
    throw;
  }
}

bool RunComplete(const fs::path& dir) {
  std::ifstream in(dir / "summary.json");
  if (!in) return false;
  try {
    const json summary = json::parse(in);
    return summary.value("complete", false);
  } catch (const json::exception&) {
    return false;
  }
}

SweepRow RowFromSummary(const fs::path& dir) {
  std::ifstream in(dir / "summary.json");
  if (!in) throw IoError("cannot open " + (dir / "summary.json").string());
  try {
    return RowFromJson(json::parse(in).at("row"));
  } catch (const json::exception& e) {
    throw ParseError((dir / "summary.json").string() + ": " + e.what());
  }
}

json AnalyzeSweep(const std::vector<SweepRow>& rows, int degree) {
  std::vector<double> rho, intensity, attack, gap, robust_intensity, robust_acc;
  for (const auto& r : rows) {
    rho.push_back(r.rho);
    intensity.push_back(r.intensity);
    attack.push_back(r.attack_accuracy);
    gap.push_back(r.gen_gap);
    if (r.rho > 0.0) {
      robust_intensity.push_back(r.intensity);
      robust_acc.push_back(r.adv_accuracy);
    }
  }
  auto spearman = [](const std::vector<double>& x, const std::vector<double>& y) -> json {
    try {
      return Spearman(x, y);
    } catch (const std::exception& e) {
      return json{{"error", e.what()}};
    }
  };
  auto fit = [degree](const std::vector<double>& x, const std::vector<double>& y) -> json {
    try {
      const PolyFit p = FitPolynomial(x, y, degree);
      return {{"degree", degree},
              {"coefficients", p.coefficients},
              {"scaled_coefficients", p.scaled_coefficients},
              {"center", p.center},
              {"scale", p.scale}};
    } catch (const std::exception& e) {
      return json{{"error", e.what()}};
    }
  };
  return {{"rows", rows.size()},
          {"spearman",
           {{"intensity_vs_rho", spearman(rho, intensity)},
            {"intensity_vs_attack_accuracy", spearman(intensity, attack)},
            {"intensity_vs_gen_gap", spearman(intensity, gap)},
            {"intensity_vs_adv_accuracy_robust",
             spearman(robust_intensity, robust_acc)}}},
          {"polyfit",
           {{"intensity_vs_rho", fit(rho, intensity)},
            {"attack_accuracy_vs_intensity", fit(intensity, attack)},
            {"gen_gap_vs_intensity", fit(intensity, gap)},
            {"adv_accuracy_vs_intensity", fit(robust_intensity, robust_acc)}}}};
}

SweepOutcome RunSweep(const ExperimentConfig& config) {
  config.Validate();
  const ExperimentData data = LoadExperimentData(config);
  struct Job {
    double rho;
    uint64_t seed;
  };
  std::vector<Job> jobs;
  for (double rho : config.rhos) {
    for (uint64_t seed : config.seeds) jobs.push_back({rho, seed});
  }

  SweepOutcome outcome;
  std::mutex mutex;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const Job& job = jobs[i];
      const fs::path dir = RunDirectory(config, job.rho, job.seed);
      try {
        if (RunComplete(dir)) {
          SweepRow row = RowFromSummary(dir);
          std::lock_guard lock(mutex);
          outcome.rows.push_back(row);
          ++outcome.resumed;
          continue;
        }
        RunResult result = TrainAndPersist(config, data, job.rho, job.seed);
        std::lock_guard lock(mutex);
        outcome.rows.push_back(result.row);
      } catch (const std::exception& e) {
        std::lock_guard lock(mutex);
        outcome.failures.push_back(dir.string() + ": " + e.what());
      }
    }
  };
  unsigned count = config.workers > 0 ? static_cast<unsigned>(config.workers)
                                      : std::max(1u, std::thread::hardware_concurrency());
  count = std::min<unsigned>(count, static_cast<unsigned>(jobs.size()));
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < count; ++w) pool.emplace_back(worker);
  }

  SortSweep(outcome.rows);
  std::sort(outcome.failures.begin(), outcome.failures.end());
  const fs::path out_dir(config.output_dir);
  fs::create_directories(out_dir);
  WriteSweepCsv(outcome.rows, out_dir / "sweep.csv");
  outcome.analysis = AnalyzeSweep(outcome.rows, config.polyfit_degree);
  outcome.analysis["failures"] = outcome.failures;
  WriteText(out_dir / "analysis.json", outcome.analysis.dump(2) + "\n");
  WriteText(out_dir / "config.txt", SerializeConfig(config));
  return outcome;
}

}  // namespace rpg
