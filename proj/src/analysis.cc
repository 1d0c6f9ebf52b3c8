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

#include "rpg/analysis.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>

#include "rpg/errors.h"

namespace rpg {

double PolyFit::operator()(double x) const {
  const double u = (x - center) / scale;
  double value = 0.0;
  for (std::size_t k = scaled_coefficients.size(); k-- > 0;) {
    value = value * u + scaled_coefficients[k];
  }
  return value;
}

PolyFit FitPolynomial(std::span<const double> xs, std::span<const double> ys,
                      int degree) {
  if (xs.size() != ys.size()) throw InvalidArgument("polyfit: length mismatch");
  if (degree < 0) throw InvalidArgument("polyfit: negative degree");
  std::vector<double> distinct(xs.begin(), xs.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() <= static_cast<std::size_t>(degree)) {
    throw DegenerateError("polyfit: need more distinct x values than the degree");
  }

  PolyFit fit;
  const double n = static_cast<double>(xs.size());
  fit.center = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double spread = 0.0;
  for (double x : xs) spread = std::max(spread, std::abs(x - fit.center));
  fit.scale = spread > 0.0 ? spread : 1.0;

  const auto terms = static_cast<Eigen::Index>(degree + 1);
  Eigen::MatrixXd vandermonde(static_cast<Eigen::Index>(xs.size()), terms);
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(ys.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double u = (xs[i] - fit.center) / fit.scale;
    double power = 1.0;
    for (Eigen::Index k = 0; k < terms; ++k) {
      vandermonde(static_cast<Eigen::Index>(i), k) = power;
      power *= u;
    }
    rhs(static_cast<Eigen::Index>(i)) = ys[i];
  }
  const Eigen::MatrixXd gram = vandermonde.transpose() * vandermonde;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  const Eigen::VectorXd diag = ldlt.vectorD();
  if (ldlt.info() != Eigen::Success ||
      diag.minCoeff() <= 1e-13 * diag.cwiseAbs().maxCoeff()) {
    throw DegenerateError("polyfit: normal equations are singular");
  }
  const Eigen::VectorXd scaled = ldlt.solve(vandermonde.transpose() * rhs);
  fit.scaled_coefficients.assign(scaled.data(), scaled.data() + scaled.size());

  // p(x) = sum_k a_k ((x - c) / s)^k, expanded binomially in powers of x.
  fit.coefficients.assign(static_cast<std::size_t>(terms), 0.0);
  for (Eigen::Index k = 0; k < terms; ++k) {
    const double a = scaled(k) / std::pow(fit.scale, static_cast<double>(k));
    double binom = 1.0;
    for (Eigen::Index j = 0; j <= k; ++j) {
      fit.coefficients[static_cast<std::size_t>(j)] +=
          a * binom * std::pow(-fit.center, static_cast<double>(k - j));
      binom = binom * static_cast<double>(k - j) / static_cast<double>(j + 1);
    }
  }
  return fit;
}

std::vector<double> AverageRanks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double Spearman(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw InvalidArgument("spearman: length mismatch");
  if (xs.size() < 3) throw InvalidArgument("spearman: need at least 3 points");
  const auto rx = AverageRanks(xs);
  const auto ry = AverageRanks(ys);
  const double n = static_cast<double>(rx.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw DegenerateError("spearman: correlation undefined for a constant input");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double AdversarialAccuracy(const DenseNet& net, const LabeledSet& set,
                           const AttackSpec& attack, const LossSpec& loss,
                           FeasibilityCounter* counter) {
  std::size_t correct = 0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const Vector x = set.features().row(static_cast<Eigen::Index>(i)).transpose();
    const Vector adv = PgdAttack(net, x, set.labels()[i], attack, loss, counter);
    if (ArgMax(Logits(net, adv)) == set.labels()[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(set.size());
}

void SortSweep(std::vector<SweepRow>& rows) {
  std::sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    return a.rho != b.rho ? a.rho < b.rho : a.seed < b.seed;
  });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].rho == rows[i - 1].rho && rows[i].seed == rows[i - 1].seed) {
      throw InvalidArgument("sweep: duplicate (rho, seed) row");
    }
  }
}

namespace {
constexpr const char* kSweepHeader =
    "rho,seed,intensity,adv_accuracy,attack_accuracy,gen_gap,eps_leading,"
    "on_avg_bound,high_prob_bound,eps_composed,eps_erm,laplace_scale,"
    "erm_attack_accuracy,erm_gen_gap,pgd_checked,pgd_violations";
}  // namespace

void WriteSweepCsv(std::span<const SweepRow> rows,
                   const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << kSweepHeader << '\n';
  char buf[640];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf),
                  "%.17g,%llu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                  "%.17g,%.17g,%.17g,%.17g,%llu,%llu\n",
                  r.rho, static_cast<unsigned long long>(r.seed), r.intensity,
                  r.adv_accuracy, r.attack_accuracy, r.gen_gap, r.eps_leading,
                  r.on_avg_bound, r.high_prob_bound, r.eps_composed, r.eps_erm,
                  r.laplace_scale, r.erm_attack_accuracy, r.erm_gen_gap,
                  static_cast<unsigned long long>(r.pgd_checked),
                  static_cast<unsigned long long>(r.pgd_violations));
    out << buf;
  }
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<SweepRow> ReadSweepCsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != kSweepHeader) throw ParseError(path.string() + ":1: unexpected header");
  std::vector<SweepRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) f.push_back(field);
    if (f.size() != 16) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": expected 16 fields");
    }
    try {
      SweepRow r;
      r.rho = std::stod(f[0]);
      r.seed = std::stoull(f[1]);
      r.intensity = std::stod(f[2]);
      r.adv_accuracy = std::stod(f[3]);
      r.attack_accuracy = std::stod(f[4]);
      r.gen_gap = std::stod(f[5]);
      r.eps_leading = std::stod(f[6]);
      r.on_avg_bound = std::stod(f[7]);
      r.high_prob_bound = std::stod(f[8]);
      r.eps_composed = std::stod(f[9]);
      r.eps_erm = std::stod(f[10]);
      r.laplace_scale = std::stod(f[11]);
      r.erm_attack_accuracy = std::stod(f[12]);
      r.erm_gen_gap = std::stod(f[13]);
      r.pgd_checked = std::stoull(f[14]);
      r.pgd_violations = std::stoull(f[15]);
      rows.push_back(r);
    } catch (const std::logic_error&) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": malformed number");
    }
  }
  return rows;
}

}  // namespace rpg
