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

#include "popprep/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "popprep/errors.hpp"
#include "popprep/rng.hpp"

namespace popprep {

void GenConfig::validate() const {
  if (n_cascades < 0) throw ConfigError("n_cascades must be >= 0");
  if (!(horizon > 0)) throw ConfigError("horizon must be > 0");
  if (!(base_rate_mu > 0)) throw ConfigError("base_rate_mu must be > 0");
  if (!(branching_alpha >= 0 && branching_alpha < 1)) {
    throw ConfigError("branching_alpha must be in [0, 1) for a subcritical process, got " +
                      std::to_string(branching_alpha));
  }
  if (!(kernel_decay_tau > 0)) throw ConfigError("kernel_decay_tau must be > 0");
  if (!(attractiveness_sigma >= 0)) throw ConfigError("attractiveness_sigma must be >= 0");
  if (!(background_decay >= 0)) throw ConfigError("background_decay must be >= 0");
  if (!(background_decay_sigma >= 0)) throw ConfigError("background_decay_sigma must be >= 0");
  if (max_events < 1) throw ConfigError("max_events must be >= 1");
  if (publish_spacing < 0) throw ConfigError("publish_spacing must be >= 0");
}

std::vector<double> simulate_hawkes(double mu, double theta, double alpha, double tau,
                                    double horizon, std::int64_t max_events,
                                    std::uint64_t seed, bool* truncated) {
  Rng rng(seed);
  std::vector<double> times;
  double t = 0.0;
  double excitation = 0.0;  // alpha/tau * sum exp(-(t - e)/tau) at time t
  const auto background = [&](double at) {
    return theta > 0 ? mu * std::exp(-at / theta) : mu;
  };
  if (truncated) *truncated = false;
  while (true) {
    // Both terms are non-increasing between events, so the intensity just
    // after the current time bounds it until the next accepted event.
    const double bound = background(t) + excitation;
    if (bound <= 0) break;
    const double wait = rng.exponential(bound);
    t += wait;
    if (t > horizon) break;
    excitation *= std::exp(-wait / tau);
    const double intensity = background(t) + excitation;
    if (rng.uniform() * bound <= intensity) {
      if (static_cast<std::int64_t>(times.size()) >= max_events) {
        if (truncated) *truncated = true;
        break;
      }
      times.push_back(t);
      excitation += alpha / tau;
    }
  }
  return times;
}

GeneratedCorpus generate(const GenConfig& cfg) {
  cfg.validate();
  GeneratedCorpus out;
  out.cascades.resize(static_cast<std::size_t>(cfg.n_cascades));
  out.truncated.assign(out.cascades.size(), false);
  const int width = std::max<int>(6, static_cast<int>(std::to_string(cfg.n_cascades).size()));
  for (std::size_t i = 0; i < out.cascades.size(); ++i) {
    Rng params_rng(derive_seed(cfg.seed, "cascade_params", i));
    const double mu = cfg.base_rate_mu * std::exp(cfg.attractiveness_sigma * params_rng.normal());
    const double theta =
        cfg.background_decay > 0
            ? cfg.background_decay * std::exp(cfg.background_decay_sigma * params_rng.normal())
            : 0.0;
    bool capped = false;
    const auto times =
        simulate_hawkes(mu, theta, cfg.branching_alpha, cfg.kernel_decay_tau, cfg.horizon,
                        cfg.max_events, derive_seed(cfg.seed, "cascade_events", i), &capped);

    Cascade& c = out.cascades[i];
    std::string num = std::to_string(i);
    if (num.size() < static_cast<std::size_t>(width)) num.insert(0, width - num.size(), '0');
    c.id = "syn" + num;
    c.publish_ts = static_cast<std::int64_t>(i) * cfg.publish_spacing;
    c.events.reserve(times.size());
    for (double x : times) c.events.push_back(static_cast<std::int64_t>(std::floor(x)));
    std::sort(c.events.begin(), c.events.end());
    out.truncated[i] = capped;
  }
  return out;
}

double quantile(std::vector<double> sample, double q) {
  if (sample.empty()) return 0.0;
  std::sort(sample.begin(), sample.end());
  const double pos = q * static_cast<double>(sample.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sample.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sample[lo] + frac * (sample[hi] - sample[lo]);
}

void summarize(const std::vector<Cascade>& cascades, std::ostream& out,
               std::int64_t truncated_count) {
  out << "metric,value\n";
  out << "count," << cascades.size() << '\n';
  if (cascades.empty()) return;

  std::vector<double> sizes;
  std::vector<double> gaps;
  sizes.reserve(cascades.size());
  double total = 0;
  for (const auto& c : cascades) {
    sizes.push_back(static_cast<double>(c.events.size()));
    total += static_cast<double>(c.events.size());
    for (std::size_t i = 1; i < c.events.size(); ++i) {
      gaps.push_back(static_cast<double>(c.events[i] - c.events[i - 1]));
    }
  }
  out << "truncated," << truncated_count << '\n';
  out << "size_mean," << total / static_cast<double>(sizes.size()) << '\n';
  const std::pair<const char*, double> qs[] = {{"min", 0.0},  {"p25", 0.25}, {"p50", 0.5},
                                               {"p75", 0.75}, {"p90", 0.9},  {"p99", 0.99},
                                               {"max", 1.0}};
  for (const auto& [name, q] : qs) out << "size_" << name << ',' << quantile(sizes, q) << '\n';
  out << "gap_count," << gaps.size() << '\n';
  if (!gaps.empty()) {
    for (const auto& [name, q] : qs) out << "gap_" << name << ',' << quantile(gaps, q) << '\n';
  }
}

}  // namespace popprep
