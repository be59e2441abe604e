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

#ifndef POPPREP_CASCADE_HPP_
#define POPPREP_CASCADE_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace popprep {

// One content item: publication anchor plus ascending reshare offsets in
// seconds from publication.
struct Cascade {
  std::string id;
  std::int64_t publish_ts = 0;
  std::vector<std::int64_t> events;

  // N(t): number of events with offset <= t.
  std::int64_t popularity_at(std::int64_t t) const;
  std::int64_t final_popularity() const {
    return static_cast<std::int64_t>(events.size());
  }

  bool operator==(const Cascade&) const = default;
};

// Throws ValidationError naming the cascade when events are negative or
// descending.
void validate_cascade(const Cascade& c);

// JSON-Lines: one {"id": string, "publish_ts": int, "events": [int...]} per
// line, keys exactly those three. Empty lines are skipped.
std::vector<Cascade> read_cascades(std::istream& in);
std::vector<Cascade> ingest_cascades(const std::filesystem::path& path);

// Canonical compact serialization, key order id/publish_ts/events.
std::string to_json_line(const Cascade& c);
void write_cascades(std::ostream& out, const std::vector<Cascade>& cascades);
void write_cascades(const std::filesystem::path& path,
                    const std::vector<Cascade>& cascades);

struct SplitFractions {
  double train = 0.75;
  double valid = 0.15;
  double test = 0.10;
};

struct SplitManifest {
  SplitFractions fractions;
  std::vector<std::string> train_ids;
  std::vector<std::string> valid_ids;
  std::vector<std::string> test_ids;
  // Set once a label budget has been applied to train_ids.
  std::optional<double> label_fraction;
  std::optional<std::uint64_t> label_seed;
};

// Sorts by (publish_ts, id); the first floor(train*n) go to train, the next
// floor(valid*n) to valid, the rest to test. Every split must be nonempty.
SplitManifest chronological_split(const std::vector<Cascade>& cascades,
                                  const SplitFractions& fractions = {});

// Seeded uniform subsample of size ceil(fraction * |ids|), returned in the
// original order.
std::vector<std::string> label_budget(const std::vector<std::string>& train_ids,
                                      double fraction, std::uint64_t seed);
SplitManifest label_budget(const SplitManifest& manifest, double fraction,
                           std::uint64_t seed);

std::string manifest_to_json(const SplitManifest& m);
SplitManifest manifest_from_json(const std::string& text);

}  // namespace popprep

#endif  // POPPREP_CASCADE_HPP_
