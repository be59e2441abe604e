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

#ifndef POPPREP_TRAINING_HPP_
#define POPPREP_TRAINING_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "popprep/cascade.hpp"
#include "popprep/labels.hpp"
#include "popprep/tcn.hpp"
#include "popprep/tei_sampler.hpp"

namespace popprep {

enum class TrainMode { kPretrain, kFinetuneFull, kFinetuneFreeze };

struct TrainConfig {
  int batch_size = 32;
  std::vector<double> lr_grid{1e-5, 5e-5, 1e-4, 5e-4, 1e-3, 5e-3, 1e-2};
  // Early stopping: stop after `patience` consecutive validation checks
  // without a new minimum. Checks run every `validate_every` mini-batches.
  int patience = 50;
  int validate_every = 100;
  std::int64_t max_steps = 20000;
  TrainMode mode = TrainMode::kPretrain;
  std::uint64_t seed = 0;

  void validate() const;
};

struct CurvePoint {
  std::int64_t step = 0;
  std::string split;  // "train" or "valid"
  double loss = 0;
};

struct LrOutcome {
  double lr = 0;
  double best_valid_loss = 0;
  std::int64_t best_step = 0;
  std::int64_t steps_run = 0;
};

struct TrainReport {
  std::string regime;
  double best_valid_loss = 0;
  std::int64_t best_step = 0;
  double lr = 0;
  double wall_seconds = 0;
  std::size_t train_examples = 0;
  std::vector<CurvePoint> curve;  // run of the selected lr
  std::vector<LrOutcome> grid;
  std::string checkpoint_path;
};

// Index of the outcome with the lowest validation loss; exact ties go to the
// smaller learning rate.
std::size_t select_lr(const std::vector<LrOutcome>& grid);

void write_curve_csv(const TrainReport& report, std::ostream& out);
std::string report_to_json(const TrainReport& report);

// Per-example objectives shared by the trainers. Each returns the unscaled
// loss and, when `grads` is given, accumulates scale * dLoss/dtheta into it.
//
// Pretext: (l_hat - l_e)^2 for one slice pair (both slices `plan`-sized).
double pretext_forward_backward(const ModelParams& params, const EncoderPlan& plan,
                                const TeiPair& pair, double scale, ModelParams* grads,
                                Mode mode, Rng* rng, EncoderTrace& ta, EncoderTrace& tb);
// Downstream: ((y - y_hat) / y)^2 for regression, BCE on the logit for
// classification; `x` is the model input (log1p dynamics).
double downstream_forward_backward(const ModelParams& params, const EncoderPlan& plan,
                                   std::span<const double> x, const LabeledExample& ex,
                                   LabelKind kind, double scale, ModelParams* grads, Mode mode,
                                   Rng* rng, EncoderTrace& trace);

enum class PretextSampling { kTei, kRandom };

struct PretrainResult {
  TrainReport report;
  ModelParams params;
  // Best constant predictor's MSE on the elapse target.
  double elapse_variance = 0;
  double initial_valid_loss = 0;
};

// Minimizes (l_e - l_hat)^2 over mini-batches of slice pairs drawn from
// `train` (resampled every epoch); early stopping on pairs drawn once from
// `valid`. Returns the best checkpoint.
PretrainResult pretrain(const std::vector<Cascade>& train, const std::vector<Cascade>& valid,
                        const TeiConfig& tei, const ModelConfig& model,
                        const TrainConfig& train_cfg,
                        PretextSampling sampling = PretextSampling::kTei);

// "TCN", "TCN-f", "PREP-TCN", "PREP-TCN-f".
std::string regime_name(bool pretrained, bool frozen);

struct FinetuneResult {
  TrainReport report;
  ModelParams params;
};

// Trains the downstream head (and the encoder unless cfg.mode is
// kFinetuneFreeze) with MRSE or BCE, one early-stopped run per learning rate,
// keeping the lr with the lowest validation loss (ties go to the smaller lr).
// `pretrained` == nullopt starts from ModelParams::initialize(model).
FinetuneResult finetune(const std::optional<ModelParams>& pretrained, const ModelConfig& model,
                        const TaskSpec& task, const std::vector<LabeledExample>& train,
                        const std::vector<LabeledExample>& valid, const TrainConfig& cfg);

// Downstream predictions (eval mode) for a set of examples.
std::vector<double> predict_examples(const ModelParams& params, LabelKind kind,
                                     const std::vector<LabeledExample>& examples);

// Task loss (MRSE or BCE) of params on examples.
double downstream_loss(const ModelParams& params, LabelKind kind,
                       const std::vector<LabeledExample>& examples);

// First step whose validation loss is <= threshold.
std::optional<std::int64_t> first_crossing(const TrainReport& report, double threshold);

struct ConvergenceComparison {
  double threshold = 0;
  std::optional<std::int64_t> first;
  std::optional<std::int64_t> second;
};

ConvergenceComparison convergence_probe(const TrainReport& first, const TrainReport& second,
                                        double threshold);
// regime,threshold,crossing_step (-1 when never reached)
void write_convergence_csv(const ConvergenceComparison& c, const std::string& first_name,
                           const std::string& second_name, std::ostream& out);

}  // namespace popprep

#endif  // POPPREP_TRAINING_HPP_
