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

#ifndef POPPREP_TCN_HPP_
#define POPPREP_TCN_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "popprep/labels.hpp"
#include "popprep/rng.hpp"

namespace popprep {

struct ModelConfig {
  int kernel_size = 8;
  int layers = 12;
  int hidden_channels = 8;
  int mlp_hidden = 32;
  double dropout = 0.0;
  int dilation_base = 2;
  int input_channels = 1;
  std::uint64_t seed = 0;

  void validate() const;
  // Trailing input positions that can reach the last output position:
  // 1 + (K-1) * sum_l base^(l-1).
  std::int64_t receptive_field() const;
  std::int64_t dilation(int layer) const;
  bool operator==(const ModelConfig&) const = default;
};

struct Tensor {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<double> data;

  std::size_t numel() const { return data.size(); }
};

// Ordered parameter set. Index layout (fixed by the config):
//   per layer l: conv{l}.weight [out x in x K], conv{l}.bias [out]
//   proj.weight [out x in], proj.bias [out]   (only when in != hidden)
//   pretext head:   mlp_p.fc1.weight [H x 2C], mlp_p.fc1.bias, mlp_p.fc2.weight [1 x H], mlp_p.fc2.bias
//   downstream head: mlp_d.fc1.weight [H x C], mlp_d.fc1.bias, mlp_d.fc2.weight [1 x H], mlp_d.fc2.bias
// The same type doubles as the gradient container.
class ModelParams {
 public:
  ModelParams() = default;
  // All-zero tensors.
  explicit ModelParams(const ModelConfig& cfg);
  // Kaiming-uniform (a = sqrt 5) weights drawn from cfg.seed, zero biases.
  static ModelParams initialize(const ModelConfig& cfg);

  const ModelConfig& config() const { return cfg_; }
  std::vector<Tensor>& tensors() { return tensors_; }
  const std::vector<Tensor>& tensors() const { return tensors_; }
  Tensor& operator[](std::size_t i) { return tensors_[i]; }
  const Tensor& operator[](std::size_t i) const { return tensors_[i]; }
  std::size_t size() const { return tensors_.size(); }
  std::size_t index_of(std::string_view name) const;
  std::size_t scalar_count() const;

  std::size_t conv_weight(int layer) const { return 2 * static_cast<std::size_t>(layer); }
  std::size_t conv_bias(int layer) const { return conv_weight(layer) + 1; }
  bool has_projection() const { return cfg_.input_channels != cfg_.hidden_channels; }
  std::size_t proj_weight() const { return 2 * static_cast<std::size_t>(cfg_.layers); }
  std::size_t proj_bias() const { return proj_weight() + 1; }
  std::size_t encoder_end() const { return proj_weight() + (has_projection() ? 2 : 0); }
  std::size_t pretext_head() const { return encoder_end(); }
  std::size_t downstream_head() const { return encoder_end() + 4; }
  bool is_encoder(std::size_t i) const { return i < encoder_end(); }

  // Re-draws one head's weights from `seed` and zeroes its biases.
  void reinitialize_head(std::size_t head_begin, std::uint64_t seed);
  void set_zero();
  void add_scaled(const ModelParams& other, double scale);
  bool operator==(const ModelParams& o) const;

 private:
  ModelConfig cfg_;
  std::vector<Tensor> tensors_;
};

// Which positions of each layer must be computed to produce the requested
// output positions. Layer inputs are stored compactly, position-major.
class EncoderPlan {
 public:
  struct Layer {
    std::size_t in_count = 0;
    std::vector<std::size_t> positions;  // output positions, ascending
    std::vector<std::int32_t> taps;      // [out_count x K] input slot or -1 (padding)
    std::vector<std::int32_t> residual;  // input slot of the same position
  };

  EncoderPlan(const ModelConfig& cfg, std::size_t length,
              std::span<const std::size_t> outputs);
  static EncoderPlan last_step(const ModelConfig& cfg, std::size_t length);
  static EncoderPlan full(const ModelConfig& cfg, std::size_t length);

  std::size_t length() const { return length_; }
  const std::vector<std::size_t>& input_positions() const { return input_positions_; }
  const Layer& layer(int l) const { return layers_[static_cast<std::size_t>(l)]; }
  int layer_count() const { return static_cast<int>(layers_.size()); }
  std::size_t mac_count(const ModelConfig& cfg) const;

 private:
  std::size_t length_;
  std::vector<std::size_t> input_positions_;
  std::vector<Layer> layers_;
};

enum class Mode { kTrain, kEval };

// Activations kept for the backward pass.
struct EncoderTrace {
  std::vector<std::vector<double>> inputs;  // layer l input, [in_count x channels]
  std::vector<std::vector<double>> pre;     // conv pre-activation, [out_count x C]
  std::vector<std::vector<double>> keep;    // dropout scale per unit, empty in eval
  std::vector<double> output;               // last layer, [out_count x C]
};

// Runs the dilated causal stack over x (LOG1P dynamics) at the plan's
// positions. `rng` is only used for dropout in train mode.
void encode_forward(const ModelParams& params, const EncoderPlan& plan,
                    std::span<const double> x, Mode mode, Rng* rng, EncoderTrace& trace);

// Accumulates parameter gradients given dLoss/d(output) laid out like
// trace.output.
void encode_backward(const ModelParams& params, const EncoderPlan& plan,
                     const EncoderTrace& trace, std::span<const double> d_output,
                     ModelParams& grads);

// Representation o: final-layer features at the last time step.
std::vector<double> encode(const ModelParams& params, std::span<const double> x,
                           Mode mode = Mode::kEval, Rng* rng = nullptr);

// Per-position outputs of the full stack, [length x C].
std::vector<double> encode_sequence(const ModelParams& params, std::span<const double> x);

// Two-layer perceptron: in -> ReLU(fc1) -> fc2 -> scalar.
struct MlpTrace {
  std::vector<double> input;
  std::vector<double> hidden_pre;
  double output = 0;
};
double mlp_forward(const ModelParams& params, std::size_t head, std::span<const double> in,
                   MlpTrace* trace = nullptr);
// Adds head gradients for dLoss/dout = d_out, returns dLoss/d(input).
std::vector<double> mlp_backward(const ModelParams& params, std::size_t head,
                                 const MlpTrace& trace, double d_out, ModelParams& grads);

double predict_elapse(const ModelParams& params, std::span<const double> o_a,
                      std::span<const double> o_b);

double softplus(double r);
double sigmoid(double r);

// Maps the downstream head's raw output r to a prediction:
// regression N(T) + softplus(r) (always above N(T)), classification sigmoid(r).
double downstream_output(double raw, double observed_n, LabelKind kind);
double predict_downstream(const ModelParams& params, std::span<const double> o,
                          double observed_n, LabelKind kind);

// Throws NumericError naming the first tensor with a NaN/Inf entry.
void check_finite(const ModelParams& p, std::string_view what);

}  // namespace popprep

#endif  // POPPREP_TCN_HPP_
