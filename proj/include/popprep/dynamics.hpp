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

#ifndef POPPREP_DYNAMICS_HPP_
#define POPPREP_DYNAMICS_HPP_

#include <cstdint>
#include <vector>

#include "popprep/cascade.hpp"

namespace popprep {

enum class Transform { kRaw, kLog1p };

// Per-time-unit reshare increments over an observation window [0, T).
struct PopularityDynamics {
  std::int64_t unit_seconds = 5;
  std::vector<double> values;
  Transform transform = Transform::kRaw;

  std::int64_t window_seconds() const {
    return unit_seconds * static_cast<std::int64_t>(values.size());
  }
};

// Slice i (1-based) covers units ((i-1)*len, i*len].
struct Slice {
  int index = 0;
  std::vector<double> values;
};

// values[i] counts events in [i*unit, (i+1)*unit) for i < T/unit. Events at a
// bin boundary fall into the later bin; events at or beyond T are dropped.
PopularityDynamics bin_dynamics(const Cascade& c, std::int64_t window_seconds,
                                std::int64_t unit_seconds = 5);

// v -> ln(1 + v). Throws if already applied.
PopularityDynamics apply_log1p(PopularityDynamics d);

// s = floor(T / slice) slices; trailing remainder units are dropped.
std::vector<Slice> segment(const PopularityDynamics& d, std::int64_t slice_seconds);

}  // namespace popprep

#endif  // POPPREP_DYNAMICS_HPP_
