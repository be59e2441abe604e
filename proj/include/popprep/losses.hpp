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

#ifndef POPPREP_LOSSES_HPP_
#define POPPREP_LOSSES_HPP_

#include <span>
#include <vector>

namespace popprep {

// Mean relative squared error, mean of ((y - y_hat) / y)^2. Every y must be
// positive. When `grad` is given it receives dMRSE/dy_hat.
double mrse_loss(std::span<const double> y, std::span<const double> y_hat,
                 std::vector<double>* grad = nullptr);

// Mean binary cross entropy for probabilities strictly inside (0, 1).
double bce_loss(std::span<const double> y, std::span<const double> p);

// Same loss from logits r (p = sigmoid(r)), evaluated as softplus(r) - y r.
// `grad` receives dLoss/dr = (sigmoid(r) - y) / M.
double bce_with_logits(std::span<const double> y, std::span<const double> logits,
                       std::vector<double>* grad = nullptr);

// Mean squared error, used for the elapse pretext.
double mse_loss(std::span<const double> y, std::span<const double> y_hat,
                std::vector<double>* grad = nullptr);

}  // namespace popprep

#endif  // POPPREP_LOSSES_HPP_
