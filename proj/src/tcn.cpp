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

#include "popprep/tcn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "popprep/errors.hpp"

namespace popprep {

void ModelConfig::validate() const {
  if (kernel_size < 1) throw ConfigError("kernel_size must be >= 1");
  if (layers < 1) throw ConfigError("layers must be >= 1");
  if (hidden_channels < 1) throw ConfigError("hidden_channels must be >= 1");
  if (mlp_hidden < 1) throw ConfigError("mlp_hidden must be >= 1");
  if (input_channels < 1) throw ConfigError("input_channels must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must be in [0, 1)");
  if (dilation_base < 1) throw ConfigError("dilation_base must be >= 1");
  if (layers > 40) throw ConfigError("layers too large");
}

std::int64_t ModelConfig::dilation(int layer) const {
  std::int64_t d = 1;
  for (int i = 0; i < layer; ++i) d *= dilation_base;
  return d;
}

std::int64_t ModelConfig::receptive_field() const {
  std::int64_t sum = 0;
  for (int l = 0; l < layers; ++l) sum += dilation(l);
  return 1 + (kernel_size - 1) * sum;
}

// ---------------------------------------------------------------------------
// Parameters

namespace {

Tensor make_tensor(std::string name, std::vector<std::size_t> shape) {
  const std::size_t n =
      std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
  return Tensor{std::move(name), std::move(shape), std::vector<double>(n, 0.0)};
}

void append_head(std::vector<Tensor>& out, const std::string& prefix, std::size_t in,
                 std::size_t hidden) {
  out.push_back(make_tensor(prefix + ".fc1.weight", {hidden, in}));
  out.push_back(make_tensor(prefix + ".fc1.bias", {hidden}));
  out.push_back(make_tensor(prefix + ".fc2.weight", {1, hidden}));
  out.push_back(make_tensor(prefix + ".fc2.bias", {1}));
}

// Weight tensors get U(-1/sqrt(fan_in), 1/sqrt(fan_in)); bias tensors stay 0.
void init_tensor(Tensor& t, std::uint64_t seed) {
  if (t.shape.size() < 2) {
    std::fill(t.data.begin(), t.data.end(), 0.0);
    return;
  }
  std::size_t fan_in = 1;
  for (std::size_t i = 1; i < t.shape.size(); ++i) fan_in *= t.shape[i];
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  Rng rng(seed);
  for (double& v : t.data) v = (2.0 * rng.uniform() - 1.0) * bound;
}

}  // namespace

ModelParams::ModelParams(const ModelConfig& cfg) : cfg_(cfg) {
  cfg.validate();
  const auto C = static_cast<std::size_t>(cfg.hidden_channels);
  const auto K = static_cast<std::size_t>(cfg.kernel_size);
  const auto H = static_cast<std::size_t>(cfg.mlp_hidden);
  for (int l = 0; l < cfg.layers; ++l) {
    const std::size_t in = l == 0 ? static_cast<std::size_t>(cfg.input_channels) : C;
    tensors_.push_back(make_tensor("conv" + std::to_string(l) + ".weight", {C, in, K}));
    tensors_.push_back(make_tensor("conv" + std::to_string(l) + ".bias", {C}));
  }
  if (has_projection()) {
    tensors_.push_back(
        make_tensor("proj.weight", {C, static_cast<std::size_t>(cfg.input_channels)}));
    tensors_.push_back(make_tensor("proj.bias", {C}));
  }
  append_head(tensors_, "mlp_p", 2 * C, H);
  append_head(tensors_, "mlp_d", C, H);
}

ModelParams ModelParams::initialize(const ModelConfig& cfg) {
  ModelParams p(cfg);
  for (std::size_t i = 0; i < p.tensors_.size(); ++i) {
    init_tensor(p.tensors_[i], derive_seed(cfg.seed, "init", i));
  }
  return p;
}

void ModelParams::reinitialize_head(std::size_t head_begin, std::uint64_t seed) {
  for (std::size_t i = head_begin; i < head_begin + 4; ++i) {
    init_tensor(tensors_[i], derive_seed(seed, "head", i - head_begin));
  }
}

std::size_t ModelParams::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < tensors_.size(); ++i) {
    if (tensors_[i].name == name) return i;
  }
  throw ValidationError("no parameter named " + std::string(name));
}

std::size_t ModelParams::scalar_count() const {
  std::size_t n = 0;
  for (const auto& t : tensors_) n += t.numel();
  return n;
}

void ModelParams::set_zero() {
  for (auto& t : tensors_) std::fill(t.data.begin(), t.data.end(), 0.0);
}

void ModelParams::add_scaled(const ModelParams& other, double scale) {
  for (std::size_t i = 0; i < tensors_.size(); ++i) {
    auto& a = tensors_[i].data;
    const auto& b = other.tensors_[i].data;
    for (std::size_t j = 0; j < a.size(); ++j) a[j] += scale * b[j];
  }
}

bool ModelParams::operator==(const ModelParams& o) const {
  if (!(cfg_ == o.cfg_) || tensors_.size() != o.tensors_.size()) return false;
  for (std::size_t i = 0; i < tensors_.size(); ++i) {
    if (tensors_[i].name != o.tensors_[i].name || tensors_[i].shape != o.tensors_[i].shape ||
        tensors_[i].data != o.tensors_[i].data) {
      return false;
    }
  }
  return true;
}

void check_finite(const ModelParams& p, std::string_view what) {
  for (const auto& t : p.tensors()) {
    for (double v : t.data) {
      if (!std::isfinite(v)) {
        throw NumericError(std::string(what) + ": non-finite value in tensor " + t.name);
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Plan

EncoderPlan::EncoderPlan(const ModelConfig& cfg, std::size_t length,
                         std::span<const std::size_t> outputs)
    : length_(length) {
  if (length == 0) throw ValidationError("encoder input must be non-empty");
  const auto K = static_cast<std::size_t>(cfg.kernel_size);
  std::vector<std::size_t> current(outputs.begin(), outputs.end());
  std::sort(current.begin(), current.end());
  current.erase(std::unique(current.begin(), current.end()), current.end());
  if (current.empty() || current.back() >= length) {
    throw ValidationError("requested encoder outputs out of range");
  }

  layers_.resize(static_cast<std::size_t>(cfg.layers));
  std::vector<char> needed(length);
  std::vector<std::int32_t> slot(length);
  for (int l = cfg.layers - 1; l >= 0; --l) {
    const auto d = static_cast<std::size_t>(cfg.dilation(l));
    std::fill(needed.begin(), needed.end(), 0);
    for (std::size_t p : current) {
      for (std::size_t k = 0; k < K; ++k) {
        const std::size_t back = (K - 1 - k) * d;
        if (back <= p) needed[p - back] = 1;
      }
    }
    std::vector<std::size_t> inputs;
    for (std::size_t q = 0; q < length; ++q) {
      if (needed[q]) {
        slot[q] = static_cast<std::int32_t>(inputs.size());
        inputs.push_back(q);
      }
    }
    Layer& layer = layers_[static_cast<std::size_t>(l)];
    layer.in_count = inputs.size();
    layer.taps.assign(current.size() * K, -1);
    layer.residual.resize(current.size());
    for (std::size_t j = 0; j < current.size(); ++j) {
      const std::size_t p = current[j];
      for (std::size_t k = 0; k < K; ++k) {
        const std::size_t back = (K - 1 - k) * d;
        if (back <= p) layer.taps[j * K + k] = slot[p - back];
      }
      layer.residual[j] = slot[p];
    }
    layer.positions = std::move(current);
    current = std::move(inputs);
  }
  input_positions_ = std::move(current);
}

EncoderPlan EncoderPlan::last_step(const ModelConfig& cfg, std::size_t length) {
  if (length == 0) throw ValidationError("encoder input must be non-empty");
  const std::size_t last = length - 1;
  return EncoderPlan(cfg, length, std::span<const std::size_t>(&last, 1));
}

EncoderPlan EncoderPlan::full(const ModelConfig& cfg, std::size_t length) {
  std::vector<std::size_t> all(length);
  std::iota(all.begin(), all.end(), 0);
  return EncoderPlan(cfg, length, all);
}

std::size_t EncoderPlan::mac_count(const ModelConfig& cfg) const {
  std::size_t macs = 0;
  for (int l = 0; l < layer_count(); ++l) {
    const std::size_t in = l == 0 ? static_cast<std::size_t>(cfg.input_channels)
                                  : static_cast<std::size_t>(cfg.hidden_channels);
    const auto& taps = layers_[static_cast<std::size_t>(l)].taps;
    const auto valid = static_cast<std::size_t>(
        std::count_if(taps.begin(), taps.end(), [](std::int32_t t) { return t >= 0; }));
    macs += valid * in * static_cast<std::size_t>(cfg.hidden_channels);
  }
  return macs;
}

// ---------------------------------------------------------------------------
// Encoder

void encode_forward(const ModelParams& params, const EncoderPlan& plan,
                    std::span<const double> x, Mode mode, Rng* rng, EncoderTrace& trace) {
  const ModelConfig& cfg = params.config();
  const auto C = static_cast<std::size_t>(cfg.hidden_channels);
  const auto K = static_cast<std::size_t>(cfg.kernel_size);
  const auto in0 = static_cast<std::size_t>(cfg.input_channels);
  if (x.size() != plan.length() * in0) {
    throw ValidationError("encoder input length does not match plan");
  }
  const bool use_dropout = mode == Mode::kTrain && cfg.dropout > 0.0;
  if (use_dropout && rng == nullptr) throw ValidationError("dropout needs an rng");
  const double keep_scale = use_dropout ? 1.0 / (1.0 - cfg.dropout) : 1.0;

  const auto L = static_cast<std::size_t>(plan.layer_count());
  trace.inputs.resize(L);
  trace.pre.resize(L);
  trace.keep.resize(L);

  {
    auto& in = trace.inputs[0];
    const auto& pos = plan.input_positions();
    in.resize(pos.size() * in0);
    for (std::size_t j = 0; j < pos.size(); ++j) {
      for (std::size_t c = 0; c < in0; ++c) in[j * in0 + c] = x[pos[j] * in0 + c];
    }
  }

  std::vector<double> out;
  for (std::size_t l = 0; l < L; ++l) {
    const auto& layer = plan.layer(static_cast<int>(l));
    const std::size_t in_ch = l == 0 ? in0 : C;
    const std::size_t m = layer.positions.size();
    const auto& in = trace.inputs[l];
    const auto& W = params[params.conv_weight(static_cast<int>(l))].data;
    const auto& b = params[params.conv_bias(static_cast<int>(l))].data;

    auto& z = trace.pre[l];
    z.resize(m * C);
    for (std::size_t j = 0; j < m; ++j) {
      double* zj = &z[j * C];
      for (std::size_t o = 0; o < C; ++o) zj[o] = b[o];
      for (std::size_t k = 0; k < K; ++k) {
        const std::int32_t t = layer.taps[j * K + k];
        if (t < 0) continue;
        const double* xt = &in[static_cast<std::size_t>(t) * in_ch];
        for (std::size_t o = 0; o < C; ++o) {
          const double* w = &W[o * in_ch * K + k];
          double acc = 0.0;
          for (std::size_t c = 0; c < in_ch; ++c) acc += w[c * K] * xt[c];
          zj[o] += acc;
        }
      }
    }

    auto& keep = trace.keep[l];
    if (use_dropout) {
      keep.resize(m * C);
      for (double& v : keep) v = rng->uniform() < cfg.dropout ? 0.0 : keep_scale;
    } else {
      keep.clear();
    }

    out.assign(m * C, 0.0);
    const bool project = l == 0 && params.has_projection();
    for (std::size_t j = 0; j < m; ++j) {
      const auto r = static_cast<std::size_t>(layer.residual[j]);
      for (std::size_t o = 0; o < C; ++o) {
        double y = z[j * C + o] > 0.0 ? z[j * C + o] : 0.0;
        if (use_dropout) y *= keep[j * C + o];
        double res;
        if (project) {
          const auto& P = params[params.proj_weight()].data;
          res = params[params.proj_bias()].data[o];
          for (std::size_t c = 0; c < in_ch; ++c) res += P[o * in_ch + c] * in[r * in_ch + c];
        } else {
          res = in[r * in_ch + o];
        }
        out[j * C + o] = y + res;
      }
    }
    if (l + 1 < L) {
      trace.inputs[l + 1] = out;
    }
  }
  trace.output = std::move(out);
}

void encode_backward(const ModelParams& params, const EncoderPlan& plan,
                     const EncoderTrace& trace, std::span<const double> d_output,
                     ModelParams& grads) {
  const ModelConfig& cfg = params.config();
  const auto C = static_cast<std::size_t>(cfg.hidden_channels);
  const auto K = static_cast<std::size_t>(cfg.kernel_size);
  const auto in0 = static_cast<std::size_t>(cfg.input_channels);
  const auto L = static_cast<std::size_t>(plan.layer_count());

  std::vector<double> d_out(d_output.begin(), d_output.end());
  std::vector<double> d_in;
  std::vector<double> dz;
  for (std::size_t li = L; li-- > 0;) {
    const auto& layer = plan.layer(static_cast<int>(li));
    const std::size_t in_ch = li == 0 ? in0 : C;
    const std::size_t m = layer.positions.size();
    const auto& in = trace.inputs[li];
    const auto& z = trace.pre[li];
    const auto& keep = trace.keep[li];
    const bool need_input_grad = li > 0;
    if (need_input_grad) d_in.assign(layer.in_count * in_ch, 0.0);

    const bool project = li == 0 && params.has_projection();
    if (project) {
      auto& dP = grads[params.proj_weight()].data;
      auto& dpb = grads[params.proj_bias()].data;
      for (std::size_t j = 0; j < m; ++j) {
        const auto r = static_cast<std::size_t>(layer.residual[j]);
        for (std::size_t o = 0; o < C; ++o) {
          const double g = d_out[j * C + o];
          dpb[o] += g;
          for (std::size_t c = 0; c < in_ch; ++c) dP[o * in_ch + c] += g * in[r * in_ch + c];
        }
      }
    } else if (need_input_grad) {
      for (std::size_t j = 0; j < m; ++j) {
        const auto r = static_cast<std::size_t>(layer.residual[j]);
        for (std::size_t o = 0; o < C; ++o) d_in[r * in_ch + o] += d_out[j * C + o];
      }
    }

    dz.resize(m * C);
    for (std::size_t i = 0; i < m * C; ++i) {
      double g = z[i] > 0.0 ? d_out[i] : 0.0;
      if (!keep.empty()) g *= keep[i];
      dz[i] = g;
    }

    const auto& W = params[params.conv_weight(static_cast<int>(li))].data;
    auto& dW = grads[params.conv_weight(static_cast<int>(li))].data;
    auto& db = grads[params.conv_bias(static_cast<int>(li))].data;
    for (std::size_t j = 0; j < m; ++j) {
      const double* dzj = &dz[j * C];
      for (std::size_t o = 0; o < C; ++o) db[o] += dzj[o];
      for (std::size_t k = 0; k < K; ++k) {
        const std::int32_t t = layer.taps[j * K + k];
        if (t < 0) continue;
        const auto ts = static_cast<std::size_t>(t) * in_ch;
        for (std::size_t o = 0; o < C; ++o) {
          const double g = dzj[o];
          if (g == 0.0) continue;
          const std::size_t wbase = o * in_ch * K + k;
          for (std::size_t c = 0; c < in_ch; ++c) {
            dW[wbase + c * K] += g * in[ts + c];
          }
          if (need_input_grad) {
            for (std::size_t c = 0; c < in_ch; ++c) d_in[ts + c] += W[wbase + c * K] * g;
          }
        }
      }
    }
    if (need_input_grad) std::swap(d_out, d_in);
  }
}

std::vector<double> encode(const ModelParams& params, std::span<const double> x, Mode mode,
                           Rng* rng) {
  const auto in0 = static_cast<std::size_t>(params.config().input_channels);
  const auto plan = EncoderPlan::last_step(params.config(), x.size() / in0);
  EncoderTrace trace;
  encode_forward(params, plan, x, mode, rng, trace);
  return trace.output;
}

std::vector<double> encode_sequence(const ModelParams& params, std::span<const double> x) {
  const auto in0 = static_cast<std::size_t>(params.config().input_channels);
  const auto plan = EncoderPlan::full(params.config(), x.size() / in0);
  EncoderTrace trace;
  encode_forward(params, plan, x, Mode::kEval, nullptr, trace);
  return trace.output;
}

// ---------------------------------------------------------------------------
// Heads

double mlp_forward(const ModelParams& params, std::size_t head, std::span<const double> in,
                   MlpTrace* trace) {
  const auto& W1 = params[head];
  const auto& b1 = params[head + 1].data;
  const auto& W2 = params[head + 2].data;
  const double b2 = params[head + 3].data[0];
  const std::size_t H = W1.shape[0];
  const std::size_t n = W1.shape[1];
  if (in.size() != n) throw ValidationError("head input has wrong width");

  std::vector<double> pre(H);
  double out = b2;
  for (std::size_t h = 0; h < H; ++h) {
    double acc = b1[h];
    for (std::size_t i = 0; i < n; ++i) acc += W1.data[h * n + i] * in[i];
    pre[h] = acc;
    if (acc > 0.0) out += W2[h] * acc;
  }
  if (trace) {
    trace->input.assign(in.begin(), in.end());
    trace->hidden_pre = std::move(pre);
    trace->output = out;
  }
  return out;
}

std::vector<double> mlp_backward(const ModelParams& params, std::size_t head,
                                 const MlpTrace& trace, double d_out, ModelParams& grads) {
  const auto& W1 = params[head];
  const auto& W2 = params[head + 2].data;
  const std::size_t H = W1.shape[0];
  const std::size_t n = W1.shape[1];
  auto& dW1 = grads[head].data;
  auto& db1 = grads[head + 1].data;
  auto& dW2 = grads[head + 2].data;
  grads[head + 3].data[0] += d_out;

  std::vector<double> d_in(n, 0.0);
  for (std::size_t h = 0; h < H; ++h) {
    const double a = trace.hidden_pre[h];
    if (a <= 0.0) continue;
    dW2[h] += d_out * a;
    const double g = d_out * W2[h];
    db1[h] += g;
    for (std::size_t i = 0; i < n; ++i) {
      dW1[h * n + i] += g * trace.input[i];
      d_in[i] += g * W1.data[h * n + i];
    }
  }
  return d_in;
}

double predict_elapse(const ModelParams& params, std::span<const double> o_a,
                      std::span<const double> o_b) {
  std::vector<double> joined(o_a.begin(), o_a.end());
  joined.insert(joined.end(), o_b.begin(), o_b.end());
  return mlp_forward(params, params.pretext_head(), joined);
}

double softplus(double r) {
  return r > 0.0 ? r + std::log1p(std::exp(-r)) : std::log1p(std::exp(r));
}

double sigmoid(double r) {
  if (r >= 0.0) return 1.0 / (1.0 + std::exp(-r));
  const double e = std::exp(r);
  return e / (1.0 + e);
}

double downstream_output(double raw, double observed_n, LabelKind kind) {
  return kind == LabelKind::kRegression ? observed_n + softplus(raw) : sigmoid(raw);
}

double predict_downstream(const ModelParams& params, std::span<const double> o,
                          double observed_n, LabelKind kind) {
  return downstream_output(mlp_forward(params, params.downstream_head(), o), observed_n, kind);
}

}  // namespace popprep
