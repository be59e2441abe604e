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

#ifndef POPPREP_SYNTHETIC_HPP_
#define POPPREP_SYNTHETIC_HPP_

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "popprep/cascade.hpp"

namespace popprep {

// Self-exciting cascade generator. Each cascade m is a univariate Hawkes
// process on [0, horizon] with conditional intensity
//
//   lambda(t) = mu_m * g_m(t) + alpha * sum_{e < t} exp(-(t - e) / tau) / tau
//
// where mu_m = base_rate_mu * LogNormal(0, attractiveness_sigma) and
// g_m(t) = exp(-t / theta_m) is the decay of outside attention, with
// theta_m = background_decay * LogNormal(0, background_decay_sigma).
// background_decay = 0 disables the decay (g = 1, a homogeneous immigrant
// stream). The decay is what makes the age of a slice inferable: with a
// stationary stream every slice looks alike.
struct GenConfig {
  std::int64_t n_cascades = 5000;
  double horizon = 3.0 * 86400.0;
  double base_rate_mu = 0.1;
  double branching_alpha = 0.5;
  double kernel_decay_tau = 600.0;
  double attractiveness_sigma = 1.0;
  double background_decay = 9600.0;
  double background_decay_sigma = 0.2;
  std::int64_t max_events = 50000;
  std::int64_t publish_spacing = 60;
  std::uint64_t seed = 0;

  void validate() const;
};

struct GeneratedCorpus {
  std::vector<Cascade> cascades;
  // truncated[i] is set when cascade i hit max_events.
  std::vector<bool> truncated;
};

GeneratedCorpus generate(const GenConfig& cfg);

// Simulates one cascade's event times (seconds, unfloored) with Ogata
// thinning. Exposed for the statistical tests.
std::vector<double> simulate_hawkes(double mu, double theta, double alpha, double tau,
                                    double horizon, std::int64_t max_events,
                                    std::uint64_t seed, bool* truncated = nullptr);

// CSV "metric,value" rows: count, size quantiles and mean, inter-event time
// quantiles. Empty input writes only the header and count=0.
void summarize(const std::vector<Cascade>& cascades, std::ostream& out,
               std::int64_t truncated_count = 0);

// Linear-interpolation quantile (type 7) of an unsorted sample.
double quantile(std::vector<double> sample, double q);

}  // namespace popprep

#endif  // POPPREP_SYNTHETIC_HPP_
