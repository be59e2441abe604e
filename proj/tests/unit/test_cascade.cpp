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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "popprep/cascade.hpp"
#include "popprep/errors.hpp"

using namespace popprep;

namespace {

std::vector<Cascade> make_cascades(int n) {
  std::vector<Cascade> out;
  for (int i = 0; i < n; ++i) {
    // Publish times deliberately out of id order.
    out.push_back(Cascade{"c" + std::to_string(i), (n - i) * 10, {0, 5, 9}});
  }
  return out;
}

}  // namespace

TEST_CASE("popularity counts events at or before t") {
  const Cascade c{"a", 0, {0, 5, 5, 12}};
  CHECK(c.popularity_at(-1) == 0);
  CHECK(c.popularity_at(0) == 1);
  CHECK(c.popularity_at(5) == 3);
  CHECK(c.popularity_at(11) == 3);
  CHECK(c.popularity_at(12) == 4);
  CHECK(c.final_popularity() == 4);
}

TEST_CASE("JSON-Lines round trip is byte-stable") {
  const std::string text =
      "{\"id\":\"a\",\"publish_ts\":100,\"events\":[0,3,3,7]}\n"
      "{\"id\":\"b\",\"publish_ts\":50,\"events\":[]}\n";
  std::istringstream in(text);
  const auto cs = read_cascades(in);
  REQUIRE(cs.size() == 2);
  CHECK(cs[0].events == std::vector<std::int64_t>{0, 3, 3, 7});
  std::ostringstream out;
  write_cascades(out, cs);
  CHECK(out.str() == text);
}

TEST_CASE("blank lines are skipped, key order is free") {
  std::istringstream in("\n{\"events\":[1],\"publish_ts\":0,\"id\":\"x\"}\n\n");
  const auto cs = read_cascades(in);
  REQUIRE(cs.size() == 1);
  CHECK(cs[0].id == "x");
}

TEST_CASE("malformed input is rejected with its line number") {
  const auto parse_line_of = [](const std::string& text) {
    std::istringstream in(text);
    try {
      read_cascades(in);
    } catch (const ParseError& e) {
      return e.line();
    }
    return std::size_t{0};
  };
  CHECK(parse_line_of("{\"id\":\"a\",\"publish_ts\":0,\"events\":[]}\n{not json\n") == 2);
  CHECK(parse_line_of("{\"id\":\"a\",\"publish_ts\":0}\n") == 1);
  CHECK(parse_line_of("{\"id\":\"a\",\"publish_ts\":0,\"events\":[],\"x\":1}\n") == 1);
  CHECK(parse_line_of("{\"id\":3,\"publish_ts\":0,\"events\":[]}\n") == 1);
  CHECK(parse_line_of("{\"id\":\"a\",\"publish_ts\":0,\"events\":[1.5]}\n") == 1);
}

TEST_CASE("event order, sign and id uniqueness are validated") {
  std::istringstream unsorted("{\"id\":\"a\",\"publish_ts\":0,\"events\":[3,1]}\n");
  CHECK_THROWS_AS(read_cascades(unsorted), ValidationError);
  std::istringstream negative("{\"id\":\"a\",\"publish_ts\":0,\"events\":[-1,1]}\n");
  CHECK_THROWS_AS(read_cascades(negative), ValidationError);
  std::istringstream dup(
      "{\"id\":\"a\",\"publish_ts\":0,\"events\":[]}\n"
      "{\"id\":\"a\",\"publish_ts\":1,\"events\":[]}\n");
  CHECK_THROWS_AS(read_cascades(dup), ValidationError);
}

TEST_CASE("missing file raises an IO error") {
  CHECK_THROWS_AS(ingest_cascades("/nonexistent/cascades.jsonl"), IoError);
}

TEST_CASE("chronological split orders by (publish_ts, id) with floor shares") {
  auto cs = make_cascades(20);
  cs.push_back(Cascade{"b", 10, {}});  // ties c19 on publish_ts, sorts before it
  const auto m = chronological_split(cs);
  // n = 21: train floor(15.75) = 15, valid floor(3.15) = 3, test = 3.
  CHECK(m.train_ids.size() == 15);
  CHECK(m.valid_ids.size() == 3);
  CHECK(m.test_ids.size() == 3);
  CHECK(m.train_ids[0] == "b");
  CHECK(m.train_ids[1] == "c19");
  CHECK(m.test_ids.back() == "c0");
  std::set<std::string> all(m.train_ids.begin(), m.train_ids.end());
  all.insert(m.valid_ids.begin(), m.valid_ids.end());
  all.insert(m.test_ids.begin(), m.test_ids.end());
  CHECK(all.size() == 21);
}

TEST_CASE("a split that would be empty is an error") {
  CHECK_THROWS_AS(chronological_split(make_cascades(2)), ValidationError);
  // n = 5: valid floor(0.75) = 0.
  CHECK_THROWS_AS(chronological_split(make_cascades(5)), ValidationError);
  CHECK_THROWS_AS(chronological_split(make_cascades(30), {0.5, 0.2, 0.2}), ValidationError);
}

TEST_CASE("label budget: ceil(fraction * n), seeded, original order") {
  std::vector<std::string> ids;
  for (int i = 0; i < 3750; ++i) ids.push_back("id" + std::to_string(i));
  const auto picked = label_budget(ids, 0.01, 9);
  CHECK(picked.size() == 38);  // ceil(37.5)
  CHECK(label_budget(ids, 0.01, 9) == picked);
  CHECK(label_budget(ids, 0.01, 10) != picked);
  // Subsequence of the input order.
  std::size_t at = 0;
  for (const auto& id : picked) {
    while (at < ids.size() && ids[at] != id) ++at;
    CHECK(at < ids.size());
  }
  CHECK(label_budget(ids, 1.0, 9) == ids);
  CHECK(label_budget(std::vector<std::string>(100, "x"), 0.03, 1).size() == 3);
  CHECK_THROWS_AS(label_budget(ids, 0.0, 1), ValidationError);
  CHECK_THROWS_AS(label_budget(ids, 1.5, 1), ValidationError);
}

TEST_CASE("manifest JSON round trip") {
  auto m = label_budget(chronological_split(make_cascades(40)), 0.1, 5);
  REQUIRE(m.label_fraction.has_value());
  const auto back = manifest_from_json(manifest_to_json(m));
  CHECK(back.train_ids == m.train_ids);
  CHECK(back.valid_ids == m.valid_ids);
  CHECK(back.test_ids == m.test_ids);
  CHECK(back.label_fraction == m.label_fraction);
  CHECK(back.label_seed == m.label_seed);
  CHECK(manifest_to_json(back) == manifest_to_json(m));
}
