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

#ifndef POPPREP_TEI_SAMPLER_HPP_
#define POPPREP_TEI_SAMPLER_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "popprep/cascade.hpp"
#include "popprep/dynamics.hpp"
#include "popprep/rng.hpp"

namespace popprep {

// Monotone weight over anchor slices, p_a(A) proportional to f(A).
enum class AnchorWeight {
  kReciprocal,   // f(A) = 1/A
  kExponential,  // f(A) = exp(-A/2)
  kConstant,     // uniform anchor
};

const char* to_string(AnchorWeight w);
AnchorWeight anchor_weight_from_string(const std::string& s);
double anchor_weight(AnchorWeight w, int anchor);

struct TeiConfig {
  int l_max = 12;
  std::int64_t pretrain_seconds = 43200;
  std::int64_t slice_seconds = 1800;
  std::int64_t unit_seconds = 5;
  AnchorWeight weight = AnchorWeight::kReciprocal;
  int pairs_per_cascade = 4;
  std::uint64_t seed = 0;

  int slice_count() const { return static_cast<int>(pretrain_seconds / slice_seconds); }
  void validate() const;
};

struct TeiPair {
  std::string cascade_id;
  Slice slice_a;
  Slice slice_b;
  int elapse = 0;  // slice_b.index - slice_a.index
};

// l_e uniform on {1..min(s, l_max)}, redrawn while it leaves no room for an
// anchor (l_e > s-1). Requires s >= 2.
int sample_elapse(int slices, int l_max, Rng& rng);

// A on {1..s-l_e} with probability f(A) / sum_a f(a).
int sample_anchor(int slices, int elapse, AnchorWeight weight, Rng& rng);

struct PretextSet {
  std::vector<TeiPair> pairs;
  std::size_t skipped = 0;  // cascades with fewer than two slices
};

// pairs_per_cascade pairs for every eligible cascade, built on LOG1P dynamics
// over cfg.pretrain_seconds. `epoch` mixes into the seed so pairs can be
// resampled every pass. Throws when no cascade is eligible.
PretextSet build_pretext_set(const std::vector<Cascade>& cascades, const TeiConfig& cfg,
                             std::uint64_t epoch = 0);

// Uniform over the s(s-1)/2 pairs A < B <= s (the ablation's sampler).
std::pair<int, int> sample_random_pair(int slices, Rng& rng);

// Ablation: (A, B) uniform over all ordered pairs A < B <= s, no l_max cap.
PretextSet random_sampling_ablation(const std::vector<Cascade>& cascades,
                                    const TeiConfig& cfg, std::uint64_t epoch = 0);

// Exact law of l_e under sample_elapse: index i holds P(l_e = i), index 0
// unused.
std::vector<double> elapse_law(int slices, int l_max);
double elapse_variance(int slices, int l_max);

// Audit dump: cascade_id, A, B, l_e.
void write_pairs_tsv(const std::vector<TeiPair>& pairs, std::ostream& out);

}  // namespace popprep

#endif  // POPPREP_TEI_SAMPLER_HPP_
