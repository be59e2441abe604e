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

#include "doctest.h"
#include "popprep/config.hpp"
#include "popprep/errors.hpp"

using namespace popprep;

TEST_CASE("defaults echo and re-parse to the same config and hash") {
  const ExperimentConfig cfg;
  const std::string text = to_text(cfg);
  const ExperimentConfig back = parse_config(text);
  CHECK(to_text(back) == text);
  CHECK(config_hash(back) == config_hash(cfg));
  CHECK(config_hash(cfg).size() == 16);
}

TEST_CASE("overrides round-trip through the echo") {
  ExperimentConfig cfg;
  apply_override(cfg, "data.seed=7");
  apply_override(cfg, "tei.l_max=6");
  apply_override(cfg, "train.lr_grid=0.001,0.01");
  apply_override(cfg, "tasks.t1_horizon=final");
  apply_override(cfg, "synthetic.branching_alpha=0.3");
  const ExperimentConfig back = parse_config(to_text(cfg));
  CHECK(config_hash(back) == config_hash(cfg));
  CHECK(back.data.seed == 7);
  CHECK(back.tei.l_max == 6);
  CHECK(back.train.lr_grid == std::vector<double>{0.001, 0.01});
  CHECK(back.task("T1").is_final());
  CHECK(back.synthetic.branching_alpha == 0.3);
  CHECK(config_hash(back) != config_hash(ExperimentConfig{}));
}

TEST_CASE("all component seeds derive from data.seed") {
  ExperimentConfig a, b;
  b.data.seed = 43;
  CHECK(a.gen_config().seed != b.gen_config().seed);
  CHECK(a.tei_config().seed != b.tei_config().seed);
  CHECK(a.model_config().seed != b.model_config().seed);
  CHECK(a.pretrain_config().seed != a.finetune_config(true).seed);
  CHECK(a.finetune_config(true).mode == TrainMode::kFinetuneFreeze);
  CHECK(a.finetune_config(false).mode == TrainMode::kFinetuneFull);
  CHECK(a.pretrain_config().lr_grid == a.pretrain_lr_grid);
}

TEST_CASE("unknown, duplicate and malformed keys are rejected") {
  CHECK_THROWS_AS(parse_config("[data]\nseed = 1\nseed = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[data]\nsede = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[nope]\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("seed = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[data]\nseed = banana\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[synthetic]\nbranching_alpha = 1.2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[tasks]\nt4_kind = ordinal\n"), ConfigError);
  ExperimentConfig cfg;
  CHECK_THROWS_AS(apply_override(cfg, "seed=1"), ConfigError);
  CHECK_THROWS_AS(apply_override(cfg, "data.nope=1"), ConfigError);
  CHECK_THROWS_AS(cfg.task("T9"), ConfigError);
}

TEST_CASE("comments and blank lines are allowed; missing keys keep defaults") {
  const auto cfg = parse_config("# experiment\n\n[tei]\nl_max = 24  \n");
  CHECK(cfg.tei.l_max == 24);
  CHECK(cfg.data.seed == ExperimentConfig{}.data.seed);
}

TEST_CASE("task windows are checked against the receptive field") {
  ExperimentConfig cfg;
  cfg.model.layers = 4;  // field 1 + 7 * 15 = 106 < 720
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
