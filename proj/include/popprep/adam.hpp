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

#ifndef POPPREP_ADAM_HPP_
#define POPPREP_ADAM_HPP_

#include <cstdint>
#include <vector>

#include "popprep/tcn.hpp"

namespace popprep {

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct OptimizerState {
  AdamOptions options;
  ModelParams first_moment;
  ModelParams second_moment;
  std::int64_t step = 0;

  OptimizerState(const ModelParams& like, AdamOptions opts);
};

// Bias-corrected Adam update. Tensors with trainable[i] == false are left
// untouched (parameters and moments). An empty mask trains everything.
void adam_step(ModelParams& params, const ModelParams& grads, OptimizerState& state,
               const std::vector<bool>& trainable = {});

}  // namespace popprep

#endif  // POPPREP_ADAM_HPP_
