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

// Command-line front end: generate, summarize, pretrain, finetune, evaluate,
// ablate. Exit codes: 0 success, 1 validation/config error, 2 runtime or
// numeric error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "popprep/cascade.hpp"
#include "popprep/checkpoint.hpp"
#include "popprep/config.hpp"
#include "popprep/errors.hpp"
#include "popprep/evaluation.hpp"
#include "popprep/pipeline.hpp"
#include "popprep/synthetic.hpp"
#include "popprep/tei_sampler.hpp"
#include "popprep/training.hpp"

namespace fs = std::filesystem;
using namespace popprep;

namespace {

std::ofstream open_out(const fs::path& path, bool append = false) {
  std::ofstream out(path, std::ios::binary | (append ? std::ios::app : std::ios::trunc));
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void write_file(const fs::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
}

struct Globals {
  std::string config_path;
  std::vector<std::string> overrides;
  bool print_config = false;
};

ExperimentConfig resolve_config(const Globals& g, const std::vector<std::string>& extra) {
  ExperimentConfig cfg = g.config_path.empty() ? ExperimentConfig{} : load_config(g.config_path);
  for (const auto& o : g.overrides) apply_override(cfg, o);
  for (const auto& o : extra) apply_override(cfg, o);
  cfg.validate();
  return cfg;
}

// Prints the effective config and returns true when --print-config was given.
bool maybe_print(const Globals& g, const ExperimentConfig& cfg) {
  if (!g.print_config) return false;
  std::cout << to_text(cfg);
  return true;
}

void announce(const std::string& cmd, const ExperimentConfig& cfg) {
  std::cerr << cmd << ": seed " << cfg.data.seed << ", run hash " << config_hash(cfg) << '\n';
}

Corpus load_corpus(const std::string& path, const ExperimentConfig& cfg) {
  return make_corpus(ingest_cascades(path), cfg.data.fractions);
}

void save_report_files(const TrainReport& report, const std::string& curve_path,
                       const std::string& report_path) {
  if (!curve_path.empty()) {
    auto out = open_out(curve_path);
    write_curve_csv(report, out);
  }
  if (!report_path.empty()) write_file(report_path, report_to_json(report) + "\n");
}

void append_results(const std::string& path, const EvalResult& r) {
  if (path.empty()) return;
  const bool fresh = !fs::exists(path) || fs::file_size(path) == 0;
  auto out = open_out(path, true);
  if (fresh) ResultsTable::write_csv_header(out);
  ResultsTable::write_csv_rows(r, out);
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Pre-training and transfer for cascade popularity prediction"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "Experiment config file (key = value sections)");
  app.add_option("--set", g.overrides, "Override a config key: section.key=value");
  app.add_flag("--print-config", g.print_config, "Print the effective config and exit");

  // generate
  auto* gen = app.add_subcommand("generate", "Write a synthetic cascade corpus (JSON-Lines)");
  std::string gen_out, gen_stats;
  std::optional<std::int64_t> gen_n;
  std::optional<std::uint64_t> gen_seed;
  std::optional<double> gen_alpha;
  gen->add_option("--out", gen_out, "Output cascade file");
  gen->add_option("--stats", gen_stats, "Stats CSV (default: <out>.stats.csv)");
  gen->add_option("--n", gen_n, "Number of cascades");
  gen->add_option("--seed", gen_seed, "Root seed");
  gen->add_option("--branching-alpha", gen_alpha, "Offspring weight, must be < 1");

  auto* sum = app.add_subcommand("summarize", "Stats CSV for a cascade file");
  std::string sum_data, sum_out;
  sum->add_option("--data", sum_data, "Cascade file")->required();
  sum->add_option("--out", sum_out, "Output CSV (default stdout)");

  // pretrain
  auto* pre = app.add_subcommand("pretrain", "Pre-train the encoder on elapse inference");
  std::string pre_data, pre_out, pre_curve, pre_report, pre_pairs, pre_sampling = "tei";
  std::optional<int> pre_lmax;
  std::optional<double> pre_lr;
  std::optional<std::uint64_t> pre_seed;
  pre->add_option("--data", pre_data, "Cascade file")->required();
  pre->add_option("--out", pre_out, "Checkpoint path");
  pre->add_option("--curve", pre_curve, "Loss curve CSV");
  pre->add_option("--report", pre_report, "Train report JSON");
  pre->add_option("--dump-pairs", pre_pairs, "TSV of the first epoch's pairs");
  pre->add_option("--l-max", pre_lmax, "Maximum elapse in slices");
  pre->add_option("--lr", pre_lr, "Use a single learning rate instead of the grid");
  pre->add_option("--seed", pre_seed, "Root seed");
  pre->add_option("--sampling", pre_sampling, "tei or random")
      ->check(CLI::IsMember({"tei", "random"}));

  // finetune
  auto* fin = app.add_subcommand("finetune", "Transfer to a downstream task and evaluate");
  std::string fin_data, fin_ckpt, fin_task, fin_results, fin_curve, fin_report, fin_out,
      fin_manifest;
  bool fin_random = false, fin_freeze = false;
  std::optional<double> fin_fraction, fin_lr;
  std::optional<std::uint64_t> fin_seed;
  fin->add_option("--data", fin_data, "Cascade file")->required();
  fin->add_option("--checkpoint", fin_ckpt, "Pre-trained checkpoint");
  fin->add_flag("--random-init", fin_random, "Start from a random encoder (TCN controls)");
  fin->add_option("--task", fin_task, "T1, T2, T3 or T4")->required();
  fin->add_option("--label-fraction", fin_fraction, "Fraction of train labels to use");
  fin->add_flag("--freeze", fin_freeze, "Freeze the encoder, train only the head");
  fin->add_option("--lr", fin_lr, "Use a single learning rate instead of the grid");
  fin->add_option("--seed", fin_seed, "Root seed");
  fin->add_option("--results", fin_results, "Append metrics to this CSV");
  fin->add_option("--curve", fin_curve, "Loss curve CSV");
  fin->add_option("--report", fin_report, "Train report JSON");
  fin->add_option("--out", fin_out, "Fine-tuned checkpoint path");
  fin->add_option("--manifest", fin_manifest, "Write the split manifest JSON here");

  auto* ev = app.add_subcommand("evaluate", "Test metrics of a fine-tuned checkpoint");
  std::string ev_data, ev_ckpt, ev_task, ev_results, ev_regime;
  ev->add_option("--data", ev_data, "Cascade file")->required();
  ev->add_option("--checkpoint", ev_ckpt, "Fine-tuned checkpoint")->required();
  ev->add_option("--task", ev_task, "T1, T2, T3 or T4")->required();
  ev->add_option("--regime", ev_regime, "Row label");
  ev->add_option("--results", ev_results, "Append metrics to this CSV");

  auto* abl = app.add_subcommand("ablate", "Compare pretext tasks across downstream tasks");
  std::string abl_data, abl_out;
  bool abl_freeze = false;
  std::optional<std::uint64_t> abl_seed;
  abl->add_option("--data", abl_data, "Cascade file")->required();
  abl->add_option("--out", abl_out, "Comparison CSV");
  abl->add_flag("--freeze", abl_freeze, "Transfer with a frozen encoder");
  abl->add_option("--seed", abl_seed, "Root seed");

  for (auto* sub : {gen, sum, pre, fin, ev, abl}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  std::vector<std::string> extra;
  const auto seed_override = [&](const std::optional<std::uint64_t>& s) {
    if (s) extra.push_back("data.seed=" + std::to_string(*s));
  };

  if (*gen) {
    if (gen_n) extra.push_back("synthetic.n_cascades=" + std::to_string(*gen_n));
    if (gen_alpha) {
      std::ostringstream os;
      os.precision(17);
      os << "synthetic.branching_alpha=" << *gen_alpha;
      extra.push_back(os.str());
    }
    seed_override(gen_seed);
    const auto cfg = resolve_config(g, extra);
    if (maybe_print(g, cfg)) return 0;
    if (gen_out.empty()) throw ConfigError("generate needs --out");
    announce("generate", cfg);
    const auto corpus = generate(cfg.gen_config());
    write_cascades(gen_out, corpus.cascades);
    const std::int64_t capped = std::count(corpus.truncated.begin(), corpus.truncated.end(), true);
    auto stats = open_out(gen_stats.empty() ? gen_out + ".stats.csv" : gen_stats);
    summarize(corpus.cascades, stats, capped);
    std::cout << "generated " << corpus.cascades.size() << " cascades (" << capped
              << " capped) with seed " << cfg.data.seed << " -> " << gen_out << '\n';
    return 0;
  }

  if (*sum) {
    const auto cascades = ingest_cascades(sum_data);
    if (sum_out.empty()) {
      summarize(cascades, std::cout);
    } else {
      auto out = open_out(sum_out);
      summarize(cascades, out);
    }
    return 0;
  }

  if (*pre) {
    if (pre_lmax) extra.push_back("tei.l_max=" + std::to_string(*pre_lmax));
    if (pre_lr) {
      std::ostringstream os;
      os.precision(17);
      os << "train.pretrain_lr_grid=" << *pre_lr;
      extra.push_back(os.str());
    }
    seed_override(pre_seed);
    const auto cfg = resolve_config(g, extra);
    if (maybe_print(g, cfg)) return 0;
    if (pre_out.empty()) throw ConfigError("pretrain needs --out");
    announce("pretrain", cfg);
    const Corpus corpus = load_corpus(pre_data, cfg);
    const auto train = corpus.train();
    const auto valid = corpus.valid();
    const auto sampling = pre_sampling == "tei" ? PretextSampling::kTei : PretextSampling::kRandom;
    if (!pre_pairs.empty()) {
      const auto set = sampling == PretextSampling::kTei
                           ? build_pretext_set(train, cfg.tei_config())
                           : random_sampling_ablation(train, cfg.tei_config());
      auto out = open_out(pre_pairs);
      write_pairs_tsv(set.pairs, out);
    }
    auto result = pretrain(train, valid, cfg.tei_config(), cfg.model_config(),
                           cfg.pretrain_config(), sampling);
    save_checkpoint(result.params, pre_out);
    result.report.checkpoint_path = pre_out;
    save_report_files(result.report, pre_curve, pre_report);
    std::cout << "pretext " << result.report.regime << ": lr " << result.report.lr
              << ", best validation MSE " << result.report.best_valid_loss << " at step "
              << result.report.best_step << " (initial " << result.initial_valid_loss
              << ", Var(l_e) " << result.elapse_variance << ") -> " << pre_out << '\n';
    return 0;
  }

  if (*fin) {
    if (fin_fraction) {
      std::ostringstream os;
      os.precision(17);
      os << "train.label_fraction=" << *fin_fraction;
      extra.push_back(os.str());
    }
    if (fin_lr) {
      std::ostringstream os;
      os.precision(17);
      os << "train.lr_grid=" << *fin_lr;
      extra.push_back(os.str());
    }
    seed_override(fin_seed);
    const auto cfg = resolve_config(g, extra);
    if (maybe_print(g, cfg)) return 0;
    const TaskSpec& task = cfg.task(fin_task);
    if (fin_ckpt.empty() && !fin_random) {
      throw ConfigError("finetune needs --checkpoint, or --random-init for the TCN controls");
    }
    if (!fin_ckpt.empty() && fin_random) {
      throw ConfigError("--checkpoint and --random-init are mutually exclusive");
    }
    announce("finetune", cfg);
    std::optional<ModelParams> init;
    if (!fin_ckpt.empty()) init = load_checkpoint(fin_ckpt, cfg.model_config());
    const Corpus corpus = load_corpus(fin_data, cfg);
    const TaskData data =
        build_task_data(corpus, task, cfg.data.unit_seconds, cfg.label_fraction, cfg.data.seed);
    if (!fin_manifest.empty()) {
      write_file(fin_manifest,
                 manifest_to_json(label_budget(corpus.manifest, cfg.label_fraction,
                                               derive_seed(cfg.data.seed, "label_budget"))) +
                     "\n");
    }
    std::cout << task.name << ": " << data.train.size() << " labeled train examples of "
              << data.train_eligible << " eligible (fraction " << cfg.label_fraction << "), "
              << data.valid.size() << " valid, " << data.test.size() << " test\n";
    RegimeRun run = run_regime(init, cfg, data, fin_freeze);
    if (!fin_out.empty()) {
      save_checkpoint(run.fit.params, fin_out);
      run.fit.report.checkpoint_path = fin_out;
    }
    save_report_files(run.fit.report, fin_curve, fin_report);
    append_results(fin_results, run.test);
    ResultsTable table;
    table.add(run.test);
    std::cout << "regime " << run.fit.report.regime << ", lr " << run.fit.report.lr
              << ", best validation loss " << run.fit.report.best_valid_loss << '\n'
              << table.render_text();
    return 0;
  }

  if (*ev) {
    const auto cfg = resolve_config(g, extra);
    if (maybe_print(g, cfg)) return 0;
    const TaskSpec& task = cfg.task(ev_task);
    const auto params = load_checkpoint(ev_ckpt);
    const Corpus corpus = load_corpus(ev_data, cfg);
    const auto test = label_all(corpus.test(), task, cfg.data.unit_seconds);
    const auto result = evaluate(params, task, test, ev_regime, cfg.data.seed);
    append_results(ev_results, result);
    ResultsTable table;
    table.add(result);
    std::cout << table.render_text();
    return 0;
  }

  if (*abl) {
    seed_override(abl_seed);
    const auto cfg = resolve_config(g, extra);
    if (maybe_print(g, cfg)) return 0;
    announce("ablate", cfg);
    const Corpus corpus = load_corpus(abl_data, cfg);
    const auto rows = run_ablation(cfg, corpus, abl_freeze);
    if (!abl_out.empty()) {
      auto out = open_out(abl_out);
      write_ablation_csv(rows, out);
    }
    write_ablation_csv(rows, std::cout);
    return 0;
  }
  return 1;
}

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return 1;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 1;
  } catch (const CheckpointError& e) {
    std::cerr << "checkpoint error: " << e.what() << '\n';
    return e.kind() == CheckpointError::Kind::kConfigMismatch ? 1 : 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 2;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
