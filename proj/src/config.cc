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

#include "rpg/config.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <utility>

namespace rpg {
namespace {

std::string Trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::string Format(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

template <typename T>
T ParseNumber(const std::string& key, const std::string& text) {
  T value{};
  const char* begin = text.data();
  const char* end = begin + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("config: " + key + ": cannot parse '" + text + "'");
  }
  return value;
}

bool ParseBool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError("config: " + key + ": expected true or false");
}

std::vector<std::string> SplitList(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = Trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

template <typename T>
std::vector<T> ParseList(const std::string& key, const std::string& text) {
  std::vector<T> values;
  for (const auto& item : SplitList(text)) values.push_back(ParseNumber<T>(key, item));
  return values;
}

template <typename T>
std::string JoinList(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    if constexpr (std::is_floating_point_v<T>) {
      out += Format(values[i]);
    } else {
      out += std::to_string(values[i]);
    }
  }
  return out;
}

struct Field {
  std::string key;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&)> set;
};

const std::vector<Field>& Fields() {
  using C = ExperimentConfig;
  auto real = [](std::string key, auto access) {
    return Field{key,
                 [access](const C& c) { return Format(access(c)); },
                 [access, key](C& c, const std::string& v) {
                   access(c) = ParseNumber<double>(key, v);
                 }};
  };
  auto integer = [](std::string key, auto access) {
    return Field{key,
                 [access](const C& c) {
                   return std::to_string(access(c));
                 },
                 [access, key](C& c, const std::string& v) {
                   using T = std::remove_reference_t<decltype(access(c))>;
                   access(c) = ParseNumber<T>(key, v);
                 }};
  };
  auto text = [](std::string key, auto access) {
    return Field{key, [access](const C& c) { return access(c); },
                 [access](C& c, const std::string& v) { access(c) = v; }};
  };
  static const std::vector<Field> fields = {
      text("data.source", [](auto& c) -> auto& { return c.data.source; }),
      text("data.train_csv", [](auto& c) -> auto& { return c.data.train_csv; }),
      text("data.test_csv", [](auto& c) -> auto& { return c.data.test_csv; }),
      {"data.csv_header",
       [](const C& c) { return std::string(c.data.csv_header ? "true" : "false"); },
       [](C& c, const std::string& v) { c.data.csv_header = ParseBool("data.csv_header", v); }},
      integer("data.num_classes", [](auto& c) -> auto& { return c.data.num_classes; }),
      integer("data.dim", [](auto& c) -> auto& { return c.data.dim; }),
      real("data.spread", [](auto& c) -> auto& { return c.data.spread; }),
      integer("data.n_train", [](auto& c) -> auto& { return c.data.n_train; }),
      integer("data.n_test", [](auto& c) -> auto& { return c.data.n_test; }),
      integer("data.seed", [](auto& c) -> auto& { return c.data.seed; }),
      {"net.hidden", [](const C& c) { return JoinList(c.train.hidden); },
       [](C& c, const std::string& v) { c.train.hidden = ParseList<int>("net.hidden", v); }},
      {"net.activation",
       [](const C& c) {
         return std::string(c.train.activation == Activation::kRelu ? "relu" : "tanh");
       },
       [](C& c, const std::string& v) {
         if (v == "relu") {
           c.train.activation = Activation::kRelu;
         } else if (v == "tanh") {
           c.train.activation = Activation::kTanh;
         } else {
           throw ConfigError("config: net.activation: expected relu or tanh");
         }
       }},
      integer("train.iterations", [](auto& c) -> auto& { return c.train.iterations; }),
      real("train.lr", [](auto& c) -> auto& { return c.train.learning_rate.initial; }),
      real("train.lr_decay", [](auto& c) -> auto& { return c.train.learning_rate.decay_factor; }),
      integer("train.lr_decay_interval",
              [](auto& c) -> auto& { return c.train.learning_rate.decay_interval; }),
      real("train.momentum", [](auto& c) -> auto& { return c.train.momentum; }),
      real("train.weight_decay", [](auto& c) -> auto& { return c.train.weight_decay; }),
      integer("train.batch_size", [](auto& c) -> auto& { return c.train.batch_size; }),
      integer("train.log_interval", [](auto& c) -> auto& { return c.train.log_interval; }),
      real("train.clip_m", [](auto& c) -> auto& { return c.train.loss.clip_m; }),
      {"attack.norm",
       [](const C& c) {
         return std::string(c.train.attack.norm == NormKind::kLinf ? "linf" : "l2");
       },
       [](C& c, const std::string& v) {
         if (v == "linf") {
           c.train.attack.norm = NormKind::kLinf;
         } else if (v == "l2") {
           c.train.attack.norm = NormKind::kL2;
         } else {
           throw ConfigError("config: attack.norm: expected linf or l2");
         }
       }},
      {"attack.rhos", [](const C& c) { return JoinList(c.rhos); },
       [](C& c, const std::string& v) { c.rhos = ParseList<double>("attack.rhos", v); }},
      integer("attack.steps", [](auto& c) -> auto& { return c.train.attack.steps; }),
      real("attack.step_fraction", [](auto& c) -> auto& { return c.step_fraction; }),
      real("privacy.delta_prime", [](auto& c) -> auto& { return c.delta_prime; }),
      integer("privacy.noise_batches", [](auto& c) -> auto& { return c.noise_batches; }),
      integer("privacy.noise_components",
              [](auto& c) -> auto& { return c.noise_components; }),
      real("bounds.c", [](auto& c) -> auto& { return c.bound_c; }),
      {"bounds.gammas", [](const C& c) { return JoinList(c.gammas); },
       [](C& c, const std::string& v) { c.gammas = ParseList<double>("bounds.gammas", v); }},
      integer("analysis.polyfit_degree", [](auto& c) -> auto& { return c.polyfit_degree; }),
      {"run.seeds", [](const C& c) { return JoinList(c.seeds); },
       [](C& c, const std::string& v) { c.seeds = ParseList<uint64_t>("run.seeds", v); }},
      integer("run.workers", [](auto& c) -> auto& { return c.workers; }),
      text("run.output_dir", [](auto& c) -> auto& { return c.output_dir; }),
  };
  return fields;
}

}  // namespace

ExperimentConfig ExperimentConfig::Defaults() {
  ExperimentConfig config;
  config.rhos = {0.0, 0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07};
  return config;
}

void ExperimentConfig::Validate() const {
  if (data.source != "synthetic" && data.source != "csv") {
    throw ConfigError("config: data.source must be synthetic or csv");
  }
  if (data.source == "csv" && (data.train_csv.empty() || data.test_csv.empty())) {
    throw ConfigError("config: csv source needs data.train_csv and data.test_csv");
  }
  if (data.source == "synthetic") {
    if (data.num_classes < 2 || data.dim < 1 || data.n_train == 0 ||
        data.n_test == 0 || !(data.spread >= 0.0)) {
      throw ConfigError("config: synthetic data parameters out of range");
    }
    if ((data.n_train + data.n_test) % static_cast<std::size_t>(data.num_classes) != 0) {
      throw ConfigError("config: n_train + n_test must be a multiple of num_classes");
    }
  }
  if (rhos.empty()) throw ConfigError("config: attack.rhos is empty");
  if (!std::is_sorted(rhos.begin(), rhos.end())) {
    throw ConfigError("config: attack.rhos must be sorted ascending");
  }
  if (rhos.front() != 0.0) {
    throw ConfigError("config: attack.rhos must start with 0 (ERM baseline row)");
  }
  if (std::adjacent_find(rhos.begin(), rhos.end()) != rhos.end()) {
    throw ConfigError("config: attack.rhos has duplicates");
  }
  if (seeds.empty()) throw ConfigError("config: run.seeds is empty");
  if (!(step_fraction > 0.0)) throw ConfigError("config: attack.step_fraction must be > 0");
  if (!(delta_prime > 0.0)) throw ConfigError("config: privacy.delta_prime must be > 0");
  if (noise_batches == 0 || noise_components == 0) {
    throw ConfigError("config: noise collection sizes must be positive");
  }
  if (!(bound_c > 0.0)) throw ConfigError("config: bounds.c must be > 0");
  if (gammas.empty()) throw ConfigError("config: bounds.gammas is empty");
  for (double g : gammas) {
    if (!(g > 0.0 && g < 1.0)) throw ConfigError("config: gammas must lie in (0, 1)");
  }
  if (polyfit_degree < 0) throw ConfigError("config: polyfit degree must be >= 0");
  if (workers < 0) throw ConfigError("config: run.workers must be >= 0");
  try {
    TrainConfig probe = train;
    probe.attack = AttackFor(rhos.back());
    probe.Validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

AttackSpec ExperimentConfig::AttackFor(double rho) const {
  AttackSpec attack = train.attack;
  attack.radius = rho;
  attack.step_size = rho * step_fraction;
  return attack;
}

ExperimentConfig ParseConfig(const std::string& text) {
  ExperimentConfig config = ExperimentConfig::Defaults();
  std::map<std::string, const Field*> by_key;
  for (const auto& field : Fields()) by_key[field.key] = &field;
  std::stringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected key = value");
    }
    const std::string key = Trim(line.substr(0, eq));
    const std::string value = Trim(line.substr(eq + 1));
    const auto it = by_key.find(key);
    if (it == by_key.end()) {
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": unknown key '" + key + "'");
    }
    try {
      it->second->set(config, value);
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return config;
}

ExperimentConfig LoadConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseConfig(buffer.str());
}

std::string SerializeConfig(const ExperimentConfig& config) {
  std::string out;
  std::string section;
  for (const auto& field : Fields()) {
    const std::string prefix = field.key.substr(0, field.key.find('.'));
    if (prefix != section) {
      if (!section.empty()) out += '\n';
      out += "# " + prefix + "\n";
      section = prefix;
    }
    out += field.key + " = " + field.get(config) + "\n";
  }
  return out;
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
  return SerializeConfig(a) == SerializeConfig(b);
}

}  // namespace rpg
