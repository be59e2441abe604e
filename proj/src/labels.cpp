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

#include "popprep/labels.hpp"

#include "popprep/errors.hpp"

namespace popprep {

const char* to_string(LabelKind kind) {
  return kind == LabelKind::kRegression ? "regression" : "classification";
}

void TaskSpec::validate() const {
  if (observation_seconds <= 0) throw ConfigError(name + ": observation time must be > 0");
  if (!is_final() && horizon_seconds <= observation_seconds) {
    throw ConfigError(name + ": prediction horizon must exceed observation time");
  }
  if (min_observed < 1) throw ConfigError(name + ": min_observed must be >= 1");
}

std::optional<LabeledExample> compute_label(const Cascade& c, const TaskSpec& spec,
                                            std::int64_t unit_seconds) {
  const std::int64_t observed = c.popularity_at(spec.observation_seconds);
  if (observed < spec.min_observed) return std::nullopt;
  const std::int64_t future =
      spec.is_final() ? c.final_popularity() : c.popularity_at(spec.horizon_seconds);

  LabeledExample ex;
  ex.cascade_id = c.id;
  ex.observed_n = observed;
  if (spec.label_kind == LabelKind::kRegression) {
    if (future == 0) return std::nullopt;
    ex.label = static_cast<double>(future);
  } else {
    ex.label = future >= 2 * observed ? 1.0 : 0.0;
  }
  ex.dynamics = bin_dynamics(c, spec.observation_seconds, unit_seconds);
  return ex;
}

}  // namespace popprep
