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

#include "popprep/adam.hpp"

#include <cmath>

#include "popprep/errors.hpp"

namespace popprep {

OptimizerState::OptimizerState(const ModelParams& like, AdamOptions opts)
    : options(opts), first_moment(like.config()), second_moment(like.config()) {
  if (!(opts.lr > 0.0)) throw ConfigError("learning rate must be > 0");
}

void adam_step(ModelParams& params, const ModelParams& grads, OptimizerState& state,
               const std::vector<bool>& trainable) {
  const AdamOptions& o = state.options;
  if (!(o.lr > 0.0)) throw ConfigError("learning rate must be > 0");
  if (params.size() != grads.size() || params.size() != state.first_moment.size()) {
    throw ValidationError("optimizer shapes do not match parameters");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(o.beta1, t);
  const double c2 = 1.0 - std::pow(o.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!trainable.empty() && !trainable[i]) continue;
    auto& p = params[i].data;
    const auto& g = grads[i].data;
    auto& m = state.first_moment[i].data;
    auto& v = state.second_moment[i].data;
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = o.beta1 * m[j] + (1.0 - o.beta1) * g[j];
      v[j] = o.beta2 * v[j] + (1.0 - o.beta2) * g[j] * g[j];
      const double m_hat = m[j] / c1;
      const double v_hat = v[j] / c2;
      p[j] -= o.lr * m_hat / (std::sqrt(v_hat) + o.eps);
    }
  }
}

}  // namespace popprep
