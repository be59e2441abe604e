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

#ifndef POPPREP_LABELS_HPP_
#define POPPREP_LABELS_HPP_

#include <cstdint>
#include <optional>
#include <string>

#include "popprep/cascade.hpp"
#include "popprep/dynamics.hpp"

namespace popprep {

enum class LabelKind { kRegression, kClassification };

const char* to_string(LabelKind kind);

// Downstream prediction setting. A horizon of kFinalHorizon means "end of the
// record": every event in the cascade counts.
struct TaskSpec {
  static constexpr std::int64_t kFinalHorizon = -1;

  std::string name;
  std::int64_t observation_seconds = 3600;
  std::int64_t horizon_seconds = kFinalHorizon;
  LabelKind label_kind = LabelKind::kRegression;
  std::int64_t min_observed = 10;

  bool is_final() const { return horizon_seconds == kFinalHorizon; }
  void validate() const;
};

struct LabeledExample {
  std::string cascade_id;
  PopularityDynamics dynamics;  // RAW counts over [0, T)
  std::int64_t observed_n = 0;  // N(T)
  double label = 0.0;           // N(T_p), or 1/0 for "doubles"
};

// Returns nullopt (filtered) when N(T) < min_observed, or for a regression
// label of zero. Classification label is 1 iff N(T_p) >= 2 N(T).
std::optional<LabeledExample> compute_label(const Cascade& c, const TaskSpec& spec,
                                            std::int64_t unit_seconds = 5);

}  // namespace popprep

#endif  // POPPREP_LABELS_HPP_
