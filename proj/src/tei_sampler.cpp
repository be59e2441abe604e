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

#include "popprep/tei_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "popprep/errors.hpp"

namespace popprep {

const char* to_string(AnchorWeight w) {
  switch (w) {
    case AnchorWeight::kReciprocal: return "reciprocal";
    case AnchorWeight::kExponential: return "exponential";
    case AnchorWeight::kConstant: return "constant";
  }
  return "?";
}

AnchorWeight anchor_weight_from_string(const std::string& s) {
  if (s == "reciprocal") return AnchorWeight::kReciprocal;
  if (s == "exponential") return AnchorWeight::kExponential;
  if (s == "constant") return AnchorWeight::kConstant;
  throw ConfigError("unknown anchor weight '" + s +
                    "' (expected reciprocal, exponential or constant)");
}

double anchor_weight(AnchorWeight w, int anchor) {
  switch (w) {
    case AnchorWeight::kReciprocal: return 1.0 / anchor;
    case AnchorWeight::kExponential: return std::exp(-anchor / 2.0);
    case AnchorWeight::kConstant: return 1.0;
  }
  return 1.0;
}

void TeiConfig::validate() const {
  if (l_max < 1) throw ConfigError("l_max must be >= 1");
  if (unit_seconds < 1 || slice_seconds % unit_seconds != 0 || slice_seconds <= 0) {
    throw ConfigError("slice length must be a positive multiple of the time unit");
  }
  if (pretrain_seconds % unit_seconds != 0) {
    throw ConfigError("pre-training window must be a multiple of the time unit");
  }
  if (pretrain_seconds < 2 * slice_seconds) {
    throw ConfigError("pre-training window must hold at least two slices");
  }
  if (pairs_per_cascade < 1) throw ConfigError("pairs_per_cascade must be >= 1");
}

int sample_elapse(int slices, int l_max, Rng& rng) {
  if (slices < 2) throw ValidationError("elapse sampling needs at least two slices");
  const int support = std::min(slices, l_max);
  while (true) {
    const int e = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(support)));
    if (e <= slices - 1) return e;
  }
}

int sample_anchor(int slices, int elapse, AnchorWeight weight, Rng& rng) {
  const int top = slices - elapse;
  if (top <= 1) return 1;
  double total = 0;
  for (int a = 1; a <= top; ++a) total += anchor_weight(weight, a);
  const double u = rng.uniform() * total;
  double acc = 0;
  for (int a = 1; a <= top; ++a) {
    acc += anchor_weight(weight, a);
    if (u < acc) return a;
  }
  return top;
}

namespace {

template <typename Draw>
PretextSet build_pairs(const std::vector<Cascade>& cascades, const TeiConfig& cfg,
                       std::uint64_t epoch, std::string_view stream, Draw draw) {
  cfg.validate();
  PretextSet out;
  const std::uint64_t epoch_seed = derive_seed(cfg.seed, stream, epoch);
  out.pairs.reserve(cascades.size() * static_cast<std::size_t>(cfg.pairs_per_cascade));
  for (std::size_t i = 0; i < cascades.size(); ++i) {
    const auto dyn =
        apply_log1p(bin_dynamics(cascades[i], cfg.pretrain_seconds, cfg.unit_seconds));
    const auto slices = segment(dyn, cfg.slice_seconds);
    const int s = static_cast<int>(slices.size());
    if (s < 2) {
      ++out.skipped;
      continue;
    }
    Rng rng(derive_seed(epoch_seed, "cascade", i));
    for (int p = 0; p < cfg.pairs_per_cascade; ++p) {
      const auto [a, b] = draw(s, rng);
      TeiPair pair;
      pair.cascade_id = cascades[i].id;
      pair.slice_a = slices[static_cast<std::size_t>(a - 1)];
      pair.slice_b = slices[static_cast<std::size_t>(b - 1)];
      pair.elapse = b - a;
      out.pairs.push_back(std::move(pair));
    }
  }
  if (out.pairs.empty()) {
    throw ValidationError("no cascade eligible for pretext sampling (" +
                          std::to_string(out.skipped) + " skipped with fewer than 2 slices)");
  }
  return out;
}

}  // namespace

PretextSet build_pretext_set(const std::vector<Cascade>& cascades, const TeiConfig& cfg,
                             std::uint64_t epoch) {
  return build_pairs(cascades, cfg, epoch, "tei", [&](int s, Rng& rng) {
    const int e = sample_elapse(s, cfg.l_max, rng);
    const int a = sample_anchor(s, e, cfg.weight, rng);
    return std::pair{a, a + e};
  });
}

std::pair<int, int> sample_random_pair(int slices, Rng& rng) {
  if (slices < 2) throw ValidationError("need at least two slices to draw a pair");
  // Enumerate ordered pairs row by row: (1,2)..(1,s), (2,3)..
  auto k = static_cast<int>(rng.below(static_cast<std::uint64_t>(slices) * (slices - 1) / 2));
  int a = 1;
  while (k >= slices - a) {
    k -= slices - a;
    ++a;
  }
  return {a, a + 1 + k};
}

PretextSet random_sampling_ablation(const std::vector<Cascade>& cascades,
                                    const TeiConfig& cfg, std::uint64_t epoch) {
  return build_pairs(cascades, cfg, epoch, "tei_random", sample_random_pair);
}

std::vector<double> elapse_law(int slices, int l_max) {
  const int top = std::min({slices, l_max, slices - 1});
  std::vector<double> p(static_cast<std::size_t>(std::max(top, 0) + 1), 0.0);
  for (int e = 1; e <= top; ++e) p[static_cast<std::size_t>(e)] = 1.0 / top;
  return p;
}

double elapse_variance(int slices, int l_max) {
  const auto p = elapse_law(slices, l_max);
  double m1 = 0, m2 = 0;
  for (std::size_t e = 1; e < p.size(); ++e) {
    m1 += p[e] * static_cast<double>(e);
    m2 += p[e] * static_cast<double>(e * e);
  }
  return m2 - m1 * m1;
}

void write_pairs_tsv(const std::vector<TeiPair>& pairs, std::ostream& out) {
  out << "cascade_id\tA\tB\tl_e\n";
  for (const auto& p : pairs) {
    out << p.cascade_id << '\t' << p.slice_a.index << '\t' << p.slice_b.index << '\t'
        << p.elapse << '\n';
  }
}

}  // namespace popprep
