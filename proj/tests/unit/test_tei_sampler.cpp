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

#include <cmath>
#include <map>
#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "popprep/errors.hpp"
#include "popprep/tei_sampler.hpp"

using namespace popprep;

namespace {

std::vector<Cascade> corpus(int n) {
  std::vector<Cascade> out;
  for (int i = 0; i < n; ++i) {
    Cascade c{"c" + std::to_string(i), i, {}};
    for (int t = 0; t < 43200; t += 17 + i) c.events.push_back(t);
    out.push_back(c);
  }
  return out;
}

}  // namespace

TEST_CASE("elapse support and rejection when l_max >= s") {
  Rng rng(1);
  std::map<int, int> seen;
  for (int i = 0; i < 20000; ++i) ++seen[sample_elapse(5, 12, rng)];
  // min(s, l_max) = 5, but l_e = 5 leaves no anchor: support is 1..4.
  CHECK(seen.size() == 4);
  CHECK(seen.begin()->first == 1);
  CHECK(seen.rbegin()->first == 4);
  CHECK_THROWS_AS(sample_elapse(1, 12, rng), ValidationError);
}

TEST_CASE("anchor stays in 1..s-l_e and follows f(A) = 1/A") {
  Rng rng(2);
  const int s = 24, e = 4, n = 200000;
  std::vector<double> counts(s, 0.0);
  for (int i = 0; i < n; ++i) {
    const int a = sample_anchor(s, e, AnchorWeight::kReciprocal, rng);
    REQUIRE((a >= 1 && a <= s - e));
    counts[a] += 1;
  }
  double z = 0;
  for (int a = 1; a <= s - e; ++a) z += 1.0 / a;
  std::vector<double> pmf(s, 0.0);
  for (int a = 1; a <= s - e; ++a) pmf[a] = 1.0 / a / z;
  int dof = 0;
  const double stat = oracle::chi_square(counts, pmf, n, dof);
  CHECK(stat < oracle::chi_square_critical_99(dof));
}

TEST_CASE("anchor weight options") {
  CHECK(anchor_weight(AnchorWeight::kReciprocal, 4) == 0.25);
  CHECK(anchor_weight(AnchorWeight::kExponential, 2) == std::exp(-1.0));
  CHECK(anchor_weight(AnchorWeight::kConstant, 9) == 1.0);
  CHECK(anchor_weight_from_string("exponential") == AnchorWeight::kExponential);
  CHECK(std::string(to_string(AnchorWeight::kConstant)) == "constant");
  CHECK_THROWS(anchor_weight_from_string("cubic"));
}

TEST_CASE("exact elapse law and its variance match the enumeration oracle") {
  for (int lmax : {1, 6, 12, 24, 30}) {
    const auto law = elapse_law(24, lmax);
    const auto ref = oracle::elapse_pmf(24, lmax);
    REQUIRE(law.size() == ref.size());
    for (std::size_t e = 0; e < law.size(); ++e) CHECK(law[e] == doctest::Approx(ref[e]));
    CHECK(elapse_variance(24, lmax) == doctest::Approx(oracle::variance_of(ref)));
  }
  // Uniform on 1..12: (12^2 - 1) / 12.
  CHECK(elapse_variance(24, 12) == doctest::Approx(143.0 / 12.0));
}

TEST_CASE("random pair sampler is uniform over A < B <= s") {
  Rng rng(5);
  const int s = 6, n = 150000;
  std::map<std::pair<int, int>, double> counts;
  for (int i = 0; i < n; ++i) {
    const auto p = sample_random_pair(s, rng);
    REQUIRE((1 <= p.first && p.first < p.second && p.second <= s));
    counts[p] += 1;
  }
  CHECK(counts.size() == 15);
  std::vector<double> c, pmf;
  for (const auto& [k, v] : counts) {
    c.push_back(v);
    pmf.push_back(1.0 / 15);
  }
  int dof = 0;
  const double stat = oracle::chi_square(c, pmf, n, dof);
  CHECK(dof == 14);
  CHECK(stat < oracle::chi_square_critical_99(dof));
}

TEST_CASE("pretext sets: invariants, determinism, per-epoch resampling") {
  const auto cs = corpus(20);
  TeiConfig cfg;
  cfg.seed = 3;
  const auto a = build_pretext_set(cs, cfg, 0);
  CHECK(a.pairs.size() == 80);
  CHECK(a.skipped == 0);
  for (const auto& p : a.pairs) {
    CHECK(p.slice_a.index >= 1);
    CHECK(p.slice_b.index <= 24);
    CHECK(p.elapse == p.slice_b.index - p.slice_a.index);
    CHECK((p.elapse >= 1 && p.elapse <= 12));
    CHECK(p.slice_a.values.size() == 360);
  }
  const auto again = build_pretext_set(cs, cfg, 0);
  const auto next = build_pretext_set(cs, cfg, 1);
  std::ostringstream x, y, z;
  write_pairs_tsv(a.pairs, x);
  write_pairs_tsv(again.pairs, y);
  write_pairs_tsv(next.pairs, z);
  CHECK(x.str() == y.str());
  CHECK(x.str() != z.str());
  CHECK(x.str().rfind("cascade_id\tA\tB\tl_e\n", 0) == 0);
}

TEST_CASE("l_max pass-through: 6 and 24 both respect their bounds") {
  const auto cs = corpus(10);
  for (int lmax : {6, 24}) {
    TeiConfig cfg;
    cfg.l_max = lmax;
    const auto set = build_pretext_set(cs, cfg);
    for (const auto& p : set.pairs) CHECK((p.elapse >= 1 && p.elapse <= std::min(lmax, 23)));
  }
}

TEST_CASE("a pre-training window shorter than two slices is a config error") {
  TeiConfig cfg;
  cfg.pretrain_seconds = 1800;  // one slice
  CHECK_THROWS_AS(build_pretext_set(corpus(3), cfg), ConfigError);
}
