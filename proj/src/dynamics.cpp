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

#include "popprep/dynamics.hpp"

#include <cmath>
#include <string>

#include "popprep/errors.hpp"

namespace popprep {

PopularityDynamics bin_dynamics(const Cascade& c, std::int64_t window_seconds,
                                std::int64_t unit_seconds) {
  if (unit_seconds < 1) throw ConfigError("time unit must be >= 1 second");
  if (window_seconds <= 0 || window_seconds % unit_seconds != 0) {
    throw ConfigError("observation window " + std::to_string(window_seconds) +
                      " s is not a positive multiple of the " +
                      std::to_string(unit_seconds) + " s time unit");
  }
  PopularityDynamics d;
  d.unit_seconds = unit_seconds;
  d.values.assign(static_cast<std::size_t>(window_seconds / unit_seconds), 0.0);
  for (std::int64_t e : c.events) {
    if (e >= window_seconds) break;
    d.values[static_cast<std::size_t>(e / unit_seconds)] += 1.0;
  }
  return d;
}

PopularityDynamics apply_log1p(PopularityDynamics d) {
  if (d.transform != Transform::kRaw) {
    throw ValidationError("log1p already applied to these dynamics");
  }
  for (double& v : d.values) v = std::log1p(v);
  d.transform = Transform::kLog1p;
  return d;
}

std::vector<Slice> segment(const PopularityDynamics& d, std::int64_t slice_seconds) {
  if (slice_seconds <= 0 || slice_seconds % d.unit_seconds != 0) {
    throw ConfigError("slice length " + std::to_string(slice_seconds) +
                      " s is not a positive multiple of the time unit");
  }
  const std::size_t len = static_cast<std::size_t>(slice_seconds / d.unit_seconds);
  const std::size_t s = d.values.size() / len;
  if (s == 0) {
    throw ConfigError("observation window shorter than one slice");
  }
  std::vector<Slice> out(s);
  for (std::size_t i = 0; i < s; ++i) {
    out[i].index = static_cast<int>(i + 1);
    out[i].values.assign(d.values.begin() + static_cast<std::ptrdiff_t>(i * len),
                         d.values.begin() + static_cast<std::ptrdiff_t>((i + 1) * len));
  }
  return out;
}

}  // namespace popprep
