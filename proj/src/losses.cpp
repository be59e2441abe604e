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

#include "popprep/losses.hpp"

#include <cmath>
#include <string>

#include "popprep/errors.hpp"
#include "popprep/tcn.hpp"

namespace popprep {

namespace {

void check_sizes(std::size_t a, std::size_t b) {
  if (a != b) throw ValidationError("loss inputs differ in length");
  if (a == 0) throw ValidationError("loss over an empty batch");
}

}  // namespace

double mrse_loss(std::span<const double> y, std::span<const double> y_hat,
                 std::vector<double>* grad) {
  check_sizes(y.size(), y_hat.size());
  const double M = static_cast<double>(y.size());
  if (grad) grad->assign(y.size(), 0.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!(y[i] > 0.0)) {
      throw ValidationError("MRSE needs positive targets, got " + std::to_string(y[i]) +
                            " at index " + std::to_string(i));
    }
    // (y - y_hat)^2 / y^2 rather than ((y - y_hat) / y)^2: one rounding
    // instead of two, so exact fixtures stay exact.
    const double diff = y[i] - y_hat[i];
    sum += diff * diff / (y[i] * y[i]);
    if (grad) (*grad)[i] = 2.0 * (y_hat[i] - y[i]) / (y[i] * y[i] * M);
  }
  return sum / M;
}

double bce_loss(std::span<const double> y, std::span<const double> p) {
  check_sizes(y.size(), p.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    sum -= y[i] * std::log(p[i]) + (1.0 - y[i]) * std::log1p(-p[i]);
  }
  return sum / static_cast<double>(y.size());
}

double bce_with_logits(std::span<const double> y, std::span<const double> logits,
                       std::vector<double>* grad) {
  check_sizes(y.size(), logits.size());
  const double M = static_cast<double>(y.size());
  if (grad) grad->assign(y.size(), 0.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    sum += softplus(logits[i]) - y[i] * logits[i];
    if (grad) (*grad)[i] = (sigmoid(logits[i]) - y[i]) / M;
  }
  return sum / M;
}

double mse_loss(std::span<const double> y, std::span<const double> y_hat,
                std::vector<double>* grad) {
  check_sizes(y.size(), y_hat.size());
  const double M = static_cast<double>(y.size());
  if (grad) grad->assign(y.size(), 0.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double d = y_hat[i] - y[i];
    sum += d * d;
    if (grad) (*grad)[i] = 2.0 * d / M;
  }
  return sum / M;
}

}  // namespace popprep
