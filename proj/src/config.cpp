// Copyright 2026 The popprep Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "popprep/config.hpp"

#include <charconv>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include "popprep/errors.hpp"
#include "popprep/rng.hpp"

namespace popprep {

std::vector<TaskSpec> ExperimentConfig::default_tasks() {
  constexpr auto kFinal = TaskSpec::kFinalHorizon;
  return {
      {"T1", 3600, 86400, LabelKind::kRegression, 10},
      {"T2", 3600, kFinal, LabelKind::kRegression, 10},
      {"T3", 7200, kFinal, LabelKind::kRegression, 10},
      {"T4", 7200, kFinal, LabelKind::kClassification, 10},
  };
}

GenConfig ExperimentConfig::gen_config() const {
  GenConfig g = synthetic;
  g.seed = derive_seed(data.seed, "synthetic");
  return g;
}

TeiConfig ExperimentConfig::tei_config() const {
  TeiConfig t = tei;
  t.slice_seconds = data.slice_seconds;
  t.unit_seconds = data.unit_seconds;
  t.seed = derive_seed(data.seed, "tei");
  return t;
}

ModelConfig ExperimentConfig::model_config() const {
  ModelConfig m = model;
  m.seed = derive_seed(data.seed, "model");
  return m;
}

TrainConfig ExperimentConfig::pretrain_config() const {
  TrainConfig t = train;
  t.mode = TrainMode::kPretrain;
  t.lr_grid = pretrain_lr_grid;
  t.seed = derive_seed(data.seed, "pretrain");
  return t;
}

TrainConfig ExperimentConfig::finetune_config(bool freeze) const {
  TrainConfig t = train;
  t.mode = freeze ? TrainMode::kFinetuneFreeze : TrainMode::kFinetuneFull;
  t.seed = derive_seed(data.seed, "finetune");
  return t;
}

const TaskSpec& ExperimentConfig::task(const std::string& name) const {
  for (const auto& t : tasks) {
    if (t.name == name) return t;
  }
  throw ConfigError("unknown task '" + name + "' (expected T1, T2, T3 or T4)");
}

void ExperimentConfig::validate() const {
  if (data.unit_seconds < 1) throw ConfigError("data.unit_seconds must be >= 1");
  if (data.slice_seconds % data.unit_seconds != 0) {
    throw ConfigError("data.slice_seconds must be a multiple of data.unit_seconds");
  }
  const double sum = data.fractions.train + data.fractions.valid + data.fractions.test;
  if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("split fractions must sum to 1");
  if (data.min_observed < 1) throw ConfigError("data.min_observed must be >= 1");
  gen_config().validate();
  tei_config().validate();
  model_config().validate();
  pretrain_config().validate();
  finetune_config(false).validate();
  if (!(label_fraction > 0 && label_fraction <= 1)) {
    throw ConfigError("train.label_fraction must be in (0, 1]");
  }
  for (const auto& t : tasks) {
    t.validate();
    if (t.observation_seconds % data.unit_seconds != 0) {
      throw ConfigError(t.name + ": observation time must be a multiple of the time unit");
    }
    const auto window = t.observation_seconds / data.unit_seconds;
    if (model.receptive_field() < window) {
      throw ConfigError(t.name + ": model receptive field " +
                        std::to_string(model.receptive_field()) + " < window of " +
                        std::to_string(window) + " units");
    }
  }
}

namespace {

std::string fmt_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  const auto* end = v.data() + v.size();
  const auto r = std::from_chars(v.data(), end, out);
  if (r.ec != std::errc() || r.ptr != end) {
    throw ConfigError("bad value '" + v + "' for " + key);
  }
  return out;
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number<double>(key, trim(item)));
  if (out.empty()) throw ConfigError(key + " must list at least one value");
  return out;
}

std::string list_text(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += fmt_double(v[i]);
  }
  return s;
}

template <typename T>
ConfigField number_field(std::string section, std::string key, T& ref) {
  const std::string full = section + "." + key;
  return {section, key,
          [&ref] {
            if constexpr (std::is_floating_point_v<T>) return fmt_double(ref);
            else return std::to_string(ref);
          },
          [&ref, full](const std::string& v) { ref = parse_number<T>(full, v); }};
}

}  // namespace

std::vector<ConfigField> config_fields(ExperimentConfig& c) {
  std::vector<ConfigField> f;
  f.push_back(number_field("data", "seed", c.data.seed));
  f.push_back(number_field("data", "unit_seconds", c.data.unit_seconds));
  f.push_back(number_field("data", "slice_seconds", c.data.slice_seconds));
  f.push_back(number_field("data", "train_fraction", c.data.fractions.train));
  f.push_back(number_field("data", "valid_fraction", c.data.fractions.valid));
  f.push_back(number_field("data", "test_fraction", c.data.fractions.test));
  f.push_back(number_field("data", "min_observed", c.data.min_observed));

  f.push_back(number_field("synthetic", "n_cascades", c.synthetic.n_cascades));
  f.push_back(number_field("synthetic", "horizon", c.synthetic.horizon));
  f.push_back(number_field("synthetic", "base_rate_mu", c.synthetic.base_rate_mu));
  f.push_back(number_field("synthetic", "branching_alpha", c.synthetic.branching_alpha));
  f.push_back(number_field("synthetic", "kernel_decay_tau", c.synthetic.kernel_decay_tau));
  f.push_back(number_field("synthetic", "attractiveness_sigma", c.synthetic.attractiveness_sigma));
  f.push_back(number_field("synthetic", "background_decay", c.synthetic.background_decay));
  f.push_back(number_field("synthetic", "background_decay_sigma",
                           c.synthetic.background_decay_sigma));
  f.push_back(number_field("synthetic", "max_events", c.synthetic.max_events));
  f.push_back(number_field("synthetic", "publish_spacing", c.synthetic.publish_spacing));

  f.push_back(number_field("tei", "l_max", c.tei.l_max));
  f.push_back(number_field("tei", "pretrain_seconds", c.tei.pretrain_seconds));
  f.push_back(number_field("tei", "pairs_per_cascade", c.tei.pairs_per_cascade));
  f.push_back({"tei", "anchor_weight", [&c] { return std::string(to_string(c.tei.weight)); },
               [&c](const std::string& v) { c.tei.weight = anchor_weight_from_string(v); }});

  f.push_back(number_field("model", "kernel_size", c.model.kernel_size));
  f.push_back(number_field("model", "layers", c.model.layers));
  f.push_back(number_field("model", "hidden_channels", c.model.hidden_channels));
  f.push_back(number_field("model", "mlp_hidden", c.model.mlp_hidden));
  f.push_back(number_field("model", "dropout", c.model.dropout));
  f.push_back(number_field("model", "dilation_base", c.model.dilation_base));

  f.push_back(number_field("train", "batch_size", c.train.batch_size));
  f.push_back({"train", "lr_grid", [&c] { return list_text(c.train.lr_grid); },
               [&c](const std::string& v) { c.train.lr_grid = parse_list("train.lr_grid", v); }});
  f.push_back({"train", "pretrain_lr_grid", [&c] { return list_text(c.pretrain_lr_grid); },
               [&c](const std::string& v) {
                 c.pretrain_lr_grid = parse_list("train.pretrain_lr_grid", v);
               }});
  f.push_back(number_field("train", "patience", c.train.patience));
  f.push_back(number_field("train", "validate_every", c.train.validate_every));
  f.push_back(number_field("train", "max_steps", c.train.max_steps));
  f.push_back(number_field("train", "label_fraction", c.label_fraction));

  for (auto& t : c.tasks) {
    std::string prefix = t.name;
    for (auto& ch : prefix) ch = static_cast<char>(std::tolower(ch));
    f.push_back(number_field("tasks", prefix + "_observation", t.observation_seconds));
    f.push_back({"tasks", prefix + "_horizon",
                 [&t] { return t.is_final() ? std::string("final") : std::to_string(t.horizon_seconds); },
                 [&t, prefix](const std::string& v) {
                   t.horizon_seconds = v == "final"
                                           ? TaskSpec::kFinalHorizon
                                           : parse_number<std::int64_t>(prefix + "_horizon", v);
                 }});
    f.push_back({"tasks", prefix + "_kind", [&t] { return std::string(to_string(t.label_kind)); },
                 [&t, prefix](const std::string& v) {
                   if (v == "regression") t.label_kind = LabelKind::kRegression;
                   else if (v == "classification") t.label_kind = LabelKind::kClassification;
                   else throw ConfigError("bad value '" + v + "' for tasks." + prefix + "_kind");
                 }});
  }
  return f;
}

namespace {

void sync_tasks(ExperimentConfig& c) {
  for (auto& t : c.tasks) t.min_observed = c.data.min_observed;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig cfg;
  auto fields = config_fields(cfg);
  std::set<std::string> seen;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(lineno) + ": bad section header");
      section = trim(line.substr(1, line.size() - 2));
      static const std::set<std::string> kSections{"data", "synthetic", "tei", "model", "train", "tasks"};
      if (!kSections.count(section)) {
        throw ConfigError("line " + std::to_string(lineno) + ": unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    }
    if (section.empty()) {
      throw ConfigError("line " + std::to_string(lineno) + ": key outside of any section");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string full = section + "." + key;
    auto it = std::find_if(fields.begin(), fields.end(), [&](const ConfigField& f) {
      return f.section == section && f.key == key;
    });
    if (it == fields.end()) {
      throw ConfigError("line " + std::to_string(lineno) + ": unknown key " + full);
    }
    if (!seen.insert(full).second) {
      throw ConfigError("line " + std::to_string(lineno) + ": duplicate key " + full);
    }
    try {
      it->set(value);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  sync_tasks(cfg);
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config " + path.string());
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_config(text);
}

std::string to_text(const ExperimentConfig& cfg) {
  ExperimentConfig copy = cfg;
  const auto fields = config_fields(copy);
  std::string out;
  std::string section;
  for (const auto& f : fields) {
    if (f.section != section) {
      if (!section.empty()) out += '\n';
      section = f.section;
      out += "[" + section + "]\n";
    }
    out += f.key + " = " + f.get() + "\n";
  }
  return out;
}

void apply_override(ExperimentConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
    throw ConfigError("override must look like section.key=value, got '" + assignment + "'");
  }
  const std::string section = trim(assignment.substr(0, dot));
  const std::string key = trim(assignment.substr(dot + 1, eq - dot - 1));
  const std::string value = trim(assignment.substr(eq + 1));
  auto fields = config_fields(cfg);
  for (auto& f : fields) {
    if (f.section == section && f.key == key) {
      f.set(value);
      sync_tasks(cfg);
      return;
    }
  }
  throw ConfigError("unknown key " + section + "." + key);
}

std::string config_hash(const ExperimentConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : to_text(cfg)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace popprep
