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

#include "popprep/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "popprep/adam.hpp"
#include "popprep/errors.hpp"
#include "popprep/losses.hpp"

namespace popprep {

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (patience < 1) throw ConfigError("patience must be >= 1");
  if (validate_every < 1) throw ConfigError("validate_every must be >= 1");
  if (max_steps < 1) throw ConfigError("max_steps must be >= 1");
  if (lr_grid.empty()) throw ConfigError("lr_grid must not be empty");
  for (double lr : lr_grid) {
    if (!(lr > 0.0)) throw ConfigError("learning rates must be > 0");
  }
}

namespace {

using Clock = std::chrono::steady_clock;

// Plans depend only on (config, length); inputs within one run share a few
// lengths.
class PlanCache {
 public:
  explicit PlanCache(const ModelConfig& cfg) : cfg_(cfg) {}
  const EncoderPlan& get(std::size_t length) {
    auto it = plans_.find(length);
    if (it == plans_.end()) {
      it = plans_.emplace(length, EncoderPlan::last_step(cfg_, length)).first;
    }
    return it->second;
  }

 private:
  ModelConfig cfg_;
  std::map<std::size_t, EncoderPlan> plans_;
};

struct Objective {
  // Returns the number of training items for this epoch.
  std::function<std::size_t(std::uint64_t)> prepare_epoch;
  // Mean loss over the batch at `params`; adds its gradient into `grads`.
  std::function<double(const ModelParams&, std::span<const std::size_t>, ModelParams&, Rng&)>
      batch;
  std::function<double(const ModelParams&)> validate;
};

struct RunOutcome {
  ModelParams best;
  double best_loss = 0;
  std::int64_t best_step = 0;
  std::int64_t steps = 0;
  std::vector<CurvePoint> curve;
};

std::vector<std::size_t> shuffled(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    std::swap(idx[i - 1], idx[rng.below(i)]);
  }
  return idx;
}

std::string lr_label(double lr) {
  std::ostringstream os;
  os << lr;
  return os.str();
}

RunOutcome run_early_stopping(ModelParams params, const std::vector<bool>& trainable,
                              Objective& objective, const TrainConfig& cfg, double lr,
                              std::uint64_t run_seed) {
  OptimizerState opt(params, AdamOptions{.lr = lr});
  ModelParams grads(params.config());
  Rng dropout_rng(derive_seed(run_seed, "dropout"));

  RunOutcome out;
  const double initial = objective.validate(params);
  if (!std::isfinite(initial)) {
    throw NumericError("validation loss is not finite at initialization (lr=" + lr_label(lr) + ")");
  }
  out.curve.push_back({0, "valid", initial});
  out.best = params;
  out.best_loss = initial;

  std::uint64_t epoch = 0;
  std::size_t n = objective.prepare_epoch(epoch);
  if (n == 0) throw ValidationError("no training examples");
  auto order = shuffled(n, derive_seed(run_seed, "shuffle", epoch));
  std::size_t pos = 0;
  double train_sum = 0;
  std::int64_t train_count = 0;
  int bad_checks = 0;
  std::int64_t step = 0;
  const auto bs = static_cast<std::size_t>(cfg.batch_size);

  while (step < cfg.max_steps) {
    if (pos >= n) {
      ++epoch;
      n = objective.prepare_epoch(epoch);
      order = shuffled(n, derive_seed(run_seed, "shuffle", epoch));
      pos = 0;
    }
    const std::size_t end = std::min(n, pos + bs);
    const std::span<const std::size_t> batch(order.data() + pos, end - pos);
    pos = end;

    grads.set_zero();
    const double loss = objective.batch(params, batch, grads, dropout_rng);
    if (!std::isfinite(loss)) {
      throw NumericError("training loss diverged at step " + std::to_string(step) +
                         " (lr=" + lr_label(lr) + ")");
    }
    check_finite(grads, "gradient at lr=" + lr_label(lr));
    adam_step(params, grads, opt, trainable);
    check_finite(params, "parameters at lr=" + lr_label(lr));
    ++step;
    train_sum += loss;
    ++train_count;

    if (step % cfg.validate_every == 0 || step == cfg.max_steps) {
      const double v = objective.validate(params);
      if (!std::isfinite(v)) {
        throw NumericError("validation loss diverged at step " + std::to_string(step) +
                           " (lr=" + lr_label(lr) + ")");
      }
      out.curve.push_back({step, "train", train_sum / static_cast<double>(train_count)});
      out.curve.push_back({step, "valid", v});
      train_sum = 0;
      train_count = 0;
      if (v < out.best_loss) {
        out.best_loss = v;
        out.best_step = step;
        out.best = params;
        bad_checks = 0;
      } else if (++bad_checks >= cfg.patience) {
        break;
      }
    }
  }
  out.steps = step;
  return out;
}

std::vector<double> log1p_values(const PopularityDynamics& d) {
  if (d.transform == Transform::kLog1p) return d.values;
  return apply_log1p(d).values;
}

// Exact variance of B - A when (A, B) is uniform over all A < B <= s.
double random_pair_variance(int s) {
  double total = 0, m1 = 0, m2 = 0;
  for (int e = 1; e < s; ++e) {
    const double w = s - e;
    total += w;
    m1 += w * e;
    m2 += w * e * e;
  }
  m1 /= total;
  m2 /= total;
  return m2 - m1 * m1;
}



// Runs one early-stopped optimization per learning rate and keeps the best;
// ties go to the smaller lr.
struct GridOutcome {
  RunOutcome run;
  double lr = 0;
  std::vector<LrOutcome> grid;
};

GridOutcome run_grid(const ModelParams& init, const std::vector<bool>& trainable,
                     Objective& objective, const TrainConfig& cfg, std::uint64_t run_seed) {
  std::vector<double> lrs = cfg.lr_grid;
  std::sort(lrs.begin(), lrs.end());
  GridOutcome out;
  std::vector<RunOutcome> runs;
  for (double lr : lrs) {
    runs.push_back(run_early_stopping(init, trainable, objective, cfg, lr, run_seed));
    out.grid.push_back({lr, runs.back().best_loss, runs.back().best_step, runs.back().steps});
  }
  const std::size_t best = select_lr(out.grid);
  out.run = std::move(runs[best]);
  out.lr = out.grid[best].lr;
  return out;
}

void fill_report(TrainReport& r, const GridOutcome& g) {
  r.best_valid_loss = g.run.best_loss;
  r.best_step = g.run.best_step;
  r.lr = g.lr;
  r.curve = g.run.curve;
  r.grid = g.grid;
}

}  // namespace

std::size_t select_lr(const std::vector<LrOutcome>& grid) {
  if (grid.empty()) throw ValidationError("empty learning-rate grid");
  std::size_t best = 0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const auto& g = grid[i];
    const auto& b = grid[best];
    if (g.best_valid_loss < b.best_valid_loss ||
        (g.best_valid_loss == b.best_valid_loss && g.lr < b.lr)) {
      best = i;
    }
  }
  return best;
}

double pretext_forward_backward(const ModelParams& params, const EncoderPlan& plan,
                                const TeiPair& pair, double scale, ModelParams* grads,
                                Mode mode, Rng* rng, EncoderTrace& ta,
                                EncoderTrace& tb) {
  encode_forward(params, plan, pair.slice_a.values, mode, rng, ta);
  encode_forward(params, plan, pair.slice_b.values, mode, rng, tb);
  std::vector<double> joined(ta.output);
  joined.insert(joined.end(), tb.output.begin(), tb.output.end());
  MlpTrace mt;
  const double pred = mlp_forward(params, params.pretext_head(), joined, grads ? &mt : nullptr);
  const double diff = pred - pair.elapse;
  if (grads) {
    const auto d_in = mlp_backward(params, params.pretext_head(), mt, 2.0 * diff * scale, *grads);
    const std::size_t C = ta.output.size();
    encode_backward(params, plan, ta, std::span<const double>(d_in.data(), C), *grads);
    encode_backward(params, plan, tb, std::span<const double>(d_in.data() + C, C), *grads);
  }
  return diff * diff;
}

PretrainResult pretrain(const std::vector<Cascade>& train, const std::vector<Cascade>& valid,
                        const TeiConfig& tei, const ModelConfig& model,
                        const TrainConfig& train_cfg, PretextSampling sampling) {
  tei.validate();
  model.validate();
  train_cfg.validate();
  if (train_cfg.mode != TrainMode::kPretrain) {
    throw ConfigError("pretrain needs train mode PRETRAIN");
  }
  const auto start = Clock::now();
  const auto draw = [&](const std::vector<Cascade>& cs, const TeiConfig& c, std::uint64_t epoch) {
    return sampling == PretextSampling::kTei ? build_pretext_set(cs, c, epoch)
                                             : random_sampling_ablation(cs, c, epoch);
  };

  TeiConfig valid_cfg = tei;
  valid_cfg.seed = derive_seed(tei.seed, "valid_pairs");
  const std::vector<TeiPair> valid_pairs = draw(valid, valid_cfg, 0).pairs;

  PlanCache plans(model);
  std::vector<TeiPair> epoch_pairs;
  EncoderTrace ta, tb;

  Objective obj;
  obj.prepare_epoch = [&](std::uint64_t epoch) {
    epoch_pairs = draw(train, tei, epoch).pairs;
    return epoch_pairs.size();
  };
  obj.batch = [&](const ModelParams& p, std::span<const std::size_t> idx, ModelParams& grads,
                  Rng& rng) {
    const double scale = 1.0 / static_cast<double>(idx.size());
    double sum = 0;
    for (std::size_t i : idx) {
      const auto& pair = epoch_pairs[i];
      sum += pretext_forward_backward(p, plans.get(pair.slice_a.values.size()), pair, scale,
                                      &grads, Mode::kTrain, &rng, ta, tb);
    }
    return sum * scale;
  };
  obj.validate = [&](const ModelParams& p) {
    double sum = 0;
    for (const auto& pair : valid_pairs) {
      sum += pretext_forward_backward(p, plans.get(pair.slice_a.values.size()), pair, 1.0,
                                      nullptr, Mode::kEval, nullptr, ta, tb);
    }
    return sum / static_cast<double>(valid_pairs.size());
  };

  const ModelParams init = ModelParams::initialize(model);
  const GridOutcome g = run_grid(init, {}, obj, train_cfg, derive_seed(train_cfg.seed, "pretrain"));

  PretrainResult result;
  result.elapse_variance = sampling == PretextSampling::kTei
                               ? elapse_variance(tei.slice_count(), tei.l_max)
                               : random_pair_variance(tei.slice_count());
  result.initial_valid_loss = g.run.curve.front().loss;
  result.report.regime = sampling == PretextSampling::kTei ? "TEI" : "TEI-random";
  fill_report(result.report, g);
  result.report.train_examples = train.size();
  result.params = g.run.best;
  result.report.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return result;
}

std::string regime_name(bool pretrained, bool frozen) {
  std::string name = pretrained ? "PREP-TCN" : "TCN";
  if (frozen) name += "-f";
  return name;
}

namespace {

// Loss and dLoss/draw for one example's raw head output; the gradient is
// multiplied by scale (1/M for a batch mean).
double example_loss(double raw, const LabeledExample& ex, LabelKind kind, double scale,
                    double* d_raw) {
  if (kind == LabelKind::kRegression) {
    const double y = ex.label;
    const double y_hat = downstream_output(raw, static_cast<double>(ex.observed_n), kind);
    const double diff = y - y_hat;
    if (d_raw) *d_raw = 2.0 * (y_hat - y) / (y * y) * sigmoid(raw) * scale;
    return diff * diff / (y * y);
  }
  const double y = ex.label;
  if (d_raw) *d_raw = (sigmoid(raw) - y) * scale;
  return softplus(raw) - y * raw;
}

double loss_from_outputs(LabelKind kind, const std::vector<LabeledExample>& examples,
                         const std::vector<double>& predictions) {
  std::vector<double> y;
  y.reserve(examples.size());
  for (const auto& ex : examples) y.push_back(ex.label);
  if (kind == LabelKind::kRegression) return mrse_loss(y, predictions);
  // Clamp away from {0,1} only where sigmoid saturated in double precision.
  std::vector<double> p(predictions);
  for (double& v : p) v = std::clamp(v, 1e-300, std::nextafter(1.0, 0.0));
  return bce_loss(y, p);
}

}  // namespace

double downstream_forward_backward(const ModelParams& params, const EncoderPlan& plan,
                                   std::span<const double> x, const LabeledExample& ex,
                                   LabelKind kind, double scale, ModelParams* grads, Mode mode,
                                   Rng* rng, EncoderTrace& trace) {
  encode_forward(params, plan, x, mode, rng, trace);
  MlpTrace mt;
  const std::size_t head = params.downstream_head();
  const double raw = mlp_forward(params, head, trace.output, grads ? &mt : nullptr);
  double d_raw = 0;
  const double loss = example_loss(raw, ex, kind, scale, grads ? &d_raw : nullptr);
  if (grads) {
    const auto d_o = mlp_backward(params, head, mt, d_raw, *grads);
    encode_backward(params, plan, trace, d_o, *grads);
  }
  return loss;
}

std::vector<double> predict_examples(const ModelParams& params, LabelKind kind,
                                     const std::vector<LabeledExample>& examples) {
  PlanCache plans(params.config());
  EncoderTrace trace;
  std::vector<double> out;
  out.reserve(examples.size());
  for (const auto& ex : examples) {
    const auto x = log1p_values(ex.dynamics);
    encode_forward(params, plans.get(x.size()), x, Mode::kEval, nullptr, trace);
    out.push_back(predict_downstream(params, trace.output, static_cast<double>(ex.observed_n), kind));
  }
  return out;
}

double downstream_loss(const ModelParams& params, LabelKind kind,
                       const std::vector<LabeledExample>& examples) {
  return loss_from_outputs(kind, examples, predict_examples(params, kind, examples));
}

FinetuneResult finetune(const std::optional<ModelParams>& pretrained, const ModelConfig& model,
                        const TaskSpec& task, const std::vector<LabeledExample>& train,
                        const std::vector<LabeledExample>& valid, const TrainConfig& cfg) {
  cfg.validate();
  task.validate();
  if (cfg.mode == TrainMode::kPretrain) {
    throw ConfigError("finetune needs mode FINETUNE_FULL or FINETUNE_FREEZE");
  }
  if (train.empty()) throw ValidationError(task.name + ": no labeled training examples");
  if (valid.empty()) throw ValidationError(task.name + ": no labeled validation examples");
  const auto start = Clock::now();
  const bool frozen = cfg.mode == TrainMode::kFinetuneFreeze;
  const LabelKind kind = task.label_kind;

  ModelParams init = pretrained ? *pretrained : ModelParams::initialize(model);
  if (pretrained && !(pretrained->config() == model)) {
    throw ConfigError("pretrained checkpoint does not match the model config");
  }
  const std::size_t window = static_cast<std::size_t>(train.front().dynamics.values.size());
  if (model.receptive_field() < static_cast<std::int64_t>(window)) {
    throw ConfigError("receptive field " + std::to_string(model.receptive_field()) +
                      " shorter than the " + std::to_string(window) + "-unit task window");
  }
  init.reinitialize_head(init.downstream_head(), derive_seed(cfg.seed, "downstream_head"));

  std::vector<std::vector<double>> train_x, valid_x;
  for (const auto& ex : train) train_x.push_back(log1p_values(ex.dynamics));
  for (const auto& ex : valid) valid_x.push_back(log1p_values(ex.dynamics));

  PlanCache plans(model);
  EncoderTrace trace;
  MlpTrace mt;
  const std::size_t head = init.downstream_head();
  std::vector<bool> trainable(init.size(), true);

  // Frozen encoder: features are computed once.
  std::vector<std::vector<double>> train_feat, valid_feat;
  if (frozen) {
    for (std::size_t i = 0; i < init.encoder_end(); ++i) trainable[i] = false;
    for (std::size_t i = init.pretext_head(); i < init.pretext_head() + 4; ++i) trainable[i] = false;
    for (const auto& x : train_x) {
      encode_forward(init, plans.get(x.size()), x, Mode::kEval, nullptr, trace);
      train_feat.push_back(trace.output);
    }
    for (const auto& x : valid_x) {
      encode_forward(init, plans.get(x.size()), x, Mode::kEval, nullptr, trace);
      valid_feat.push_back(trace.output);
    }
  } else {
    for (std::size_t i = init.pretext_head(); i < init.pretext_head() + 4; ++i) trainable[i] = false;
  }

  Objective obj;
  obj.prepare_epoch = [&](std::uint64_t) { return train.size(); };
  obj.batch = [&](const ModelParams& p, std::span<const std::size_t> idx, ModelParams& grads,
                  Rng& rng) {
    const double inv_m = 1.0 / static_cast<double>(idx.size());
    double sum = 0;
    for (std::size_t i : idx) {
      double d_raw = 0;
      if (frozen) {
        const double raw = mlp_forward(p, head, train_feat[i], &mt);
        sum += example_loss(raw, train[i], kind, inv_m, &d_raw);
        mlp_backward(p, head, mt, d_raw, grads);
      } else {
        sum += downstream_forward_backward(p, plans.get(train_x[i].size()), train_x[i],
                                           train[i], kind, inv_m, &grads, Mode::kTrain, &rng,
                                           trace);
      }
    }
    return sum * inv_m;
  };
  obj.validate = [&](const ModelParams& p) {
    std::vector<double> preds;
    preds.reserve(valid.size());
    for (std::size_t i = 0; i < valid.size(); ++i) {
      const auto n = static_cast<double>(valid[i].observed_n);
      if (frozen) {
        preds.push_back(predict_downstream(p, valid_feat[i], n, kind));
      } else {
        encode_forward(p, plans.get(valid_x[i].size()), valid_x[i], Mode::kEval, nullptr, trace);
        preds.push_back(predict_downstream(p, trace.output, n, kind));
      }
    }
    return loss_from_outputs(kind, valid, preds);
  };

  const GridOutcome g = run_grid(init, trainable, obj, cfg, derive_seed(cfg.seed, "finetune"));
  FinetuneResult result;
  result.report.regime = regime_name(pretrained.has_value(), frozen);
  fill_report(result.report, g);
  result.report.train_examples = train.size();
  result.params = g.run.best;
  result.report.wall_seconds = std::chrono::duration<double>(Clock::now() - start).count();
  return result;
}

std::optional<std::int64_t> first_crossing(const TrainReport& report, double threshold) {
  for (const auto& p : report.curve) {
    if (p.split == "valid" && p.loss <= threshold) return p.step;
  }
  return std::nullopt;
}

ConvergenceComparison convergence_probe(const TrainReport& first, const TrainReport& second,
                                        double threshold) {
  return {threshold, first_crossing(first, threshold), first_crossing(second, threshold)};
}

void write_convergence_csv(const ConvergenceComparison& c, const std::string& first_name,
                           const std::string& second_name, std::ostream& out) {
  const auto step = [](const std::optional<std::int64_t>& s) { return s ? *s : -1; };
  out << "regime,threshold,crossing_step\n";
  out.precision(17);
  out << first_name << ',' << c.threshold << ',' << step(c.first) << '\n';
  out << second_name << ',' << c.threshold << ',' << step(c.second) << '\n';
}

void write_curve_csv(const TrainReport& report, std::ostream& out) {
  out << "step,split,loss\n";
  const auto old = out.precision(17);
  for (const auto& p : report.curve) out << p.step << ',' << p.split << ',' << p.loss << '\n';
  out.precision(old);
}

std::string report_to_json(const TrainReport& report) {
  nlohmann::json grid = nlohmann::json::array();
  for (const auto& g : report.grid) {
    grid.push_back({{"lr", g.lr},
                    {"best_valid_loss", g.best_valid_loss},
                    {"best_step", g.best_step},
                    {"steps_run", g.steps_run}});
  }
  const nlohmann::json j{{"regime", report.regime},
                         {"best_valid_loss", report.best_valid_loss},
                         {"best_step", report.best_step},
                         {"lr", report.lr},
                         {"wall_seconds", report.wall_seconds},
                         {"train_examples", report.train_examples},
                         {"checkpoint", report.checkpoint_path},
                         {"lr_grid", grid}};
  return j.dump(2);
}

}  // namespace popprep
