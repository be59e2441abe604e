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

#ifndef POPPREP_PIPELINE_HPP_
#define POPPREP_PIPELINE_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "popprep/cascade.hpp"
#include "popprep/config.hpp"
#include "popprep/evaluation.hpp"
#include "popprep/training.hpp"

namespace popprep {

// A cascade set with its chronological split.
struct Corpus {
  std::vector<Cascade> cascades;
  SplitManifest manifest;

  std::vector<Cascade> select(const std::vector<std::string>& ids) const;
  std::vector<Cascade> train() const { return select(manifest.train_ids); }
  std::vector<Cascade> valid() const { return select(manifest.valid_ids); }
  std::vector<Cascade> test() const { return select(manifest.test_ids); }
};

Corpus make_corpus(std::vector<Cascade> cascades, const SplitFractions& fractions);

// Labeled examples of one task. The label budget applies to the train
// examples that survive filtering; valid and test are kept whole.
struct TaskData {
  TaskSpec task;
  std::vector<LabeledExample> train;
  std::vector<LabeledExample> valid;
  std::vector<LabeledExample> test;
  std::size_t train_eligible = 0;
};

std::vector<LabeledExample> label_all(const std::vector<Cascade>& cascades, const TaskSpec& task,
                                      std::int64_t unit_seconds);
TaskData build_task_data(const Corpus& corpus, const TaskSpec& task, std::int64_t unit_seconds,
                         double label_fraction, std::uint64_t seed);

struct RegimeRun {
  FinetuneResult fit;
  EvalResult test;
};

// Fine-tunes from `pretrained` (nullopt: random init) and evaluates on test.
RegimeRun run_regime(const std::optional<ModelParams>& pretrained, const ExperimentConfig& cfg,
                     const TaskData& data, bool freeze);

// Trains encoder + downstream head on one task with every train label; the
// supervised stand-in for a pretext.
FinetuneResult supervised_pretext(const ExperimentConfig& cfg, const Corpus& corpus,
                                  const TaskSpec& task);

struct AblationRow {
  std::string pretext;  // TEI, TEI-random, T1-supervised
  std::string task;
  double valid_loss = 0;
  EvalResult test;
};

// Three pre-trainings (TEI, TEI with random pair sampling, supervised T1),
// each transferred to every configured task.
std::vector<AblationRow> run_ablation(const ExperimentConfig& cfg, const Corpus& corpus,
                                      bool freeze);
void write_ablation_csv(const std::vector<AblationRow>& rows, std::ostream& out);

}  // namespace popprep

#endif  // POPPREP_PIPELINE_HPP_
