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

// Test-side reference implementations. These are deliberately naive and share
// no code with the library: direct convolution from the definition, central
// finite differences, closed-form sampler laws by enumeration, and table
// critical values.

#ifndef POPPREP_TESTS_ORACLES_HPP_
#define POPPREP_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "popprep/tcn.hpp"

namespace popprep::oracle {

// y[t][o] = b[o] + sum_k sum_c W[o][c][k] * x[t - (K-1-k) d][c], with x = 0
// before the sequence start. x and y are position-major ([n x channels]).
inline std::vector<double> direct_causal_conv(const std::vector<double>& W,
                                              const std::vector<double>& b,
                                              const std::vector<double>& x, std::size_t n,
                                              std::size_t c_in, std::size_t c_out,
                                              std::size_t K, std::size_t d) {
  std::vector<double> y(n * c_out, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t o = 0; o < c_out; ++o) {
      double acc = b[o];
      for (std::size_t k = 0; k < K; ++k) {
        const std::size_t back = (K - 1 - k) * d;
        if (back > t) continue;
        for (std::size_t c = 0; c < c_in; ++c) {
          acc += W[(o * c_in + c) * K + k] * x[(t - back) * c_in + c];
        }
      }
      y[t * c_out + o] = acc;
    }
  }
  return y;
}

struct GradientCheck {
  double max_rel_error = 0;
  std::string worst;  // "tensor[index]"
  std::size_t checked = 0;
};

// Relative error |a - n| / max(|a|, |n|, floor). The floor keeps gradients
// that are zero up to round-off (dead ReLUs) from dividing by ~0: central
// differences with h = 1e-6 carry ~1e-10 absolute noise, so 1e-6 keeps a
// 1e-4 relative bound meaningful.
inline constexpr double kGradientFloor = 1e-6;
inline constexpr double kFiniteDifferenceStep = 1e-5;

// Compares analytic gradients to central differences over every scalar.
// `loss(params, grads)` returns the loss and, when grads != nullptr,
// accumulates dLoss/dtheta into it.
inline GradientCheck check_gradients(
    ModelParams params, const std::function<double(const ModelParams&, ModelParams*)>& loss) {
  ModelParams grads(params.config());
  grads.set_zero();
  loss(params, &grads);
  GradientCheck out;
  for (std::size_t i = 0; i < params.size(); ++i) {
    for (std::size_t j = 0; j < params[i].numel(); ++j) {
      const double saved = params[i].data[j];
      params[i].data[j] = saved + kFiniteDifferenceStep;
      const double up = loss(params, nullptr);
      params[i].data[j] = saved - kFiniteDifferenceStep;
      const double down = loss(params, nullptr);
      params[i].data[j] = saved;
      const double numeric = (up - down) / (2.0 * kFiniteDifferenceStep);
      const double analytic = grads[i].data[j];
      const double rel = std::abs(analytic - numeric) /
                         std::max({std::abs(analytic), std::abs(numeric), kGradientFloor});
      ++out.checked;
      if (rel > out.max_rel_error) {
        out.max_rel_error = rel;
        out.worst = params[i].name + "[" + std::to_string(j) + "]";
      }
    }
  }
  return out;
}

// P(l_e = e) for the TEI elapse sampler: uniform on 1..min(s, l_max),
// conditioned on e <= s - 1.
inline std::vector<double> elapse_pmf(int s, int l_max) {
  const int top = std::min(s - 1, l_max);
  std::vector<double> p(static_cast<std::size_t>(top) + 1, 0.0);
  for (int e = 1; e <= top; ++e) p[static_cast<std::size_t>(e)] = 1.0 / top;
  return p;
}

// P(A = a) marginalized over the elapse law, with P(A | e) proportional to
// f(A) on 1..s-e.
inline std::vector<double> anchor_pmf(int s, int l_max, const std::function<double(int)>& f) {
  const auto pe = elapse_pmf(s, l_max);
  std::vector<double> p(static_cast<std::size_t>(s), 0.0);
  for (int e = 1; e < static_cast<int>(pe.size()); ++e) {
    double z = 0;
    for (int a = 1; a <= s - e; ++a) z += f(a);
    for (int a = 1; a <= s - e; ++a) p[static_cast<std::size_t>(a)] += pe[e] * f(a) / z;
  }
  return p;
}

// l_e = B - A under the uniform law on pairs A < B <= s: (s - e) / C(s, 2).
inline std::vector<double> triangular_elapse_pmf(int s) {
  std::vector<double> p(static_cast<std::size_t>(s), 0.0);
  const double pairs = s * (s - 1) / 2.0;
  for (int e = 1; e < s; ++e) p[static_cast<std::size_t>(e)] = (s - e) / pairs;
  return p;
}

inline double variance_of(const std::vector<double>& pmf) {
  double m1 = 0, m2 = 0;
  for (std::size_t e = 0; e < pmf.size(); ++e) {
    m1 += pmf[e] * static_cast<double>(e);
    m2 += pmf[e] * static_cast<double>(e * e);
  }
  return m2 - m1 * m1;
}

// Upper 1% critical values of the chi-square distribution (standard tables).
inline double chi_square_critical_99(int dof) {
  static const double table[] = {0,      6.635,  9.210,  11.345, 13.277, 15.086, 16.812,
                                 18.475, 20.090, 21.666, 23.209, 24.725, 26.217, 27.688,
                                 29.141, 30.578, 32.000, 33.409, 34.805, 36.191, 37.566,
                                 38.932, 40.289, 41.638, 42.980};
  return table[dof];
}

inline double chi_square(const std::vector<double>& counts, const std::vector<double>& pmf,
                         double n, int& dof) {
  double stat = 0;
  dof = -1;
  for (std::size_t i = 0; i < pmf.size(); ++i) {
    if (pmf[i] <= 0) continue;
    const double expected = n * pmf[i];
    stat += (counts[i] - expected) * (counts[i] - expected) / expected;
    ++dof;
  }
  return stat;
}

}  // namespace popprep::oracle

#endif  // POPPREP_TESTS_ORACLES_HPP_
