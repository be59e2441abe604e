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

#ifndef POPPREP_CONFIG_HPP_
#define POPPREP_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "popprep/cascade.hpp"
#include "popprep/labels.hpp"
#include "popprep/synthetic.hpp"
#include "popprep/tcn.hpp"
#include "popprep/tei_sampler.hpp"
#include "popprep/training.hpp"

namespace popprep {

struct DataConfig {
  std::uint64_t seed = 42;
  std::int64_t unit_seconds = 5;
  std::int64_t slice_seconds = 1800;
  SplitFractions fractions;
  std::int64_t min_observed = 10;
};

// The whole experiment in one flat key=value file:
//
//   [data] [synthetic] [tei] [model] [train] [tasks]
//
// Every component seed is derived from data.seed; the per-module seed fields
// below are filled in by the accessors, not read from the file.
struct ExperimentConfig {
  DataConfig data;
  GenConfig synthetic;
  TeiConfig tei;
  ModelConfig model;
  TrainConfig train;
  std::vector<double> pretrain_lr_grid{1e-5, 5e-5, 1e-4, 5e-4, 1e-3, 5e-3, 1e-2};
  double label_fraction = 0.01;
  std::vector<TaskSpec> tasks = default_tasks();

  static std::vector<TaskSpec> default_tasks();

  GenConfig gen_config() const;
  TeiConfig tei_config() const;
  ModelConfig model_config() const;
  TrainConfig pretrain_config() const;
  TrainConfig finetune_config(bool freeze) const;
  const TaskSpec& task(const std::string& name) const;

  // Cross-module checks (divisibility, receptive field vs longest window).
  void validate() const;
};

struct ConfigField {
  std::string section;
  std::string key;
  std::function<std::string()> get;
  std::function<void(const std::string&)> set;
};

// Field table over a live config; drives parsing, echo and CLI overrides.
std::vector<ConfigField> config_fields(ExperimentConfig& cfg);

// Keys absent from the text keep their defaults. Unknown sections or keys,
// duplicates and malformed values throw ConfigError with the line number.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

// Canonical text with every key; parse_config(to_text(c)) reproduces c.
std::string to_text(const ExperimentConfig& cfg);

// Applies one "section.key=value" override.
void apply_override(ExperimentConfig& cfg, const std::string& assignment);

// FNV-1a of the canonical text, hex.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace popprep

#endif  // POPPREP_CONFIG_HPP_
