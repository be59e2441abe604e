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

#include "popprep/pipeline.hpp"

#include <ostream>
#include <unordered_map>

#include "popprep/errors.hpp"
#include "popprep/rng.hpp"

namespace popprep {

std::vector<Cascade> Corpus::select(const std::vector<std::string>& ids) const {
  std::unordered_map<std::string, const Cascade*> by_id;
  for (const auto& c : cascades) by_id.emplace(c.id, &c);
  std::vector<Cascade> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    const auto it = by_id.find(id);
    if (it == by_id.end()) throw ValidationError("unknown cascade id " + id);
    out.push_back(*it->second);
  }
  return out;
}

Corpus make_corpus(std::vector<Cascade> cascades, const SplitFractions& fractions) {
  Corpus c;
  c.manifest = chronological_split(cascades, fractions);
  c.cascades = std::move(cascades);
  return c;
}

std::vector<LabeledExample> label_all(const std::vector<Cascade>& cascades, const TaskSpec& task,
                                      std::int64_t unit_seconds) {
  std::vector<LabeledExample> out;
  for (const auto& c : cascades) {
    if (auto ex = compute_label(c, task, unit_seconds)) out.push_back(std::move(*ex));
  }
  return out;
}

TaskData build_task_data(const Corpus& corpus, const TaskSpec& task, std::int64_t unit_seconds,
                         double label_fraction, std::uint64_t seed) {
  TaskData d;
  d.task = task;
  auto train = label_all(corpus.train(), task, unit_seconds);
  d.train_eligible = train.size();
  std::vector<std::string> ids;
  for (const auto& ex : train) ids.push_back(ex.cascade_id);
  const auto keep = label_budget(ids, label_fraction, derive_seed(seed, "label_budget_" + task.name));
  std::size_t k = 0;
  for (auto& ex : train) {
    if (k < keep.size() && ex.cascade_id == keep[k]) {
      d.train.push_back(std::move(ex));
      ++k;
    }
  }
  d.valid = label_all(corpus.valid(), task, unit_seconds);
  d.test = label_all(corpus.test(), task, unit_seconds);
  return d;
}

RegimeRun run_regime(const std::optional<ModelParams>& pretrained, const ExperimentConfig& cfg,
                     const TaskData& data, bool freeze) {
  RegimeRun run;
  run.fit = finetune(pretrained, cfg.model_config(), data.task, data.train, data.valid,
                     cfg.finetune_config(freeze));
  run.test = evaluate(run.fit.params, data.task, data.test, run.fit.report.regime, cfg.data.seed);
  return run;
}

FinetuneResult supervised_pretext(const ExperimentConfig& cfg, const Corpus& corpus,
                                  const TaskSpec& task) {
  const TaskData data = build_task_data(corpus, task, cfg.data.unit_seconds, 1.0, cfg.data.seed);
  TrainConfig t = cfg.finetune_config(false);
  t.lr_grid = cfg.pretrain_lr_grid;
  t.seed = derive_seed(cfg.data.seed, "supervised_pretext");
  return finetune(std::nullopt, cfg.model_config(), task, data.train, data.valid, t);
}

std::vector<AblationRow> run_ablation(const ExperimentConfig& cfg, const Corpus& corpus,
                                      bool freeze) {
  const auto train = corpus.train();
  const auto valid = corpus.valid();
  std::vector<std::pair<std::string, ModelParams>> pretexts;
  pretexts.emplace_back("TEI", pretrain(train, valid, cfg.tei_config(), cfg.model_config(),
                                        cfg.pretrain_config(), PretextSampling::kTei)
                                   .params);
  pretexts.emplace_back("TEI-random",
                        pretrain(train, valid, cfg.tei_config(), cfg.model_config(),
                                 cfg.pretrain_config(), PretextSampling::kRandom)
                            .params);
  pretexts.emplace_back("T1-supervised", supervised_pretext(cfg, corpus, cfg.task("T1")).params);

  std::vector<AblationRow> rows;
  for (const auto& task : cfg.tasks) {
    const TaskData data =
        build_task_data(corpus, task, cfg.data.unit_seconds, cfg.label_fraction, cfg.data.seed);
    for (const auto& [name, params] : pretexts) {
      RegimeRun run = run_regime(params, cfg, data, freeze);
      AblationRow row;
      row.pretext = name;
      row.task = task.name;
      row.valid_loss = run.fit.report.best_valid_loss;
      row.test = std::move(run.test);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void write_ablation_csv(const std::vector<AblationRow>& rows, std::ostream& out) {
  const auto old = out.precision(17);
  out << "pretext,task,valid_loss,metric,value\n";
  for (const auto& r : rows) {
    for (const auto& [metric, value] : r.test.metrics) {
      out << r.pretext << ',' << r.task << ',' << r.valid_loss << ',' << metric << ',' << value
          << '\n';
    }
  }
  out.precision(old);
}

}  // namespace popprep
