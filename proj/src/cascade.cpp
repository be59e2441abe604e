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

#include "popprep/cascade.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "json.hpp"
#include "popprep/errors.hpp"
#include "popprep/rng.hpp"

namespace popprep {

using nlohmann::json;

std::int64_t Cascade::popularity_at(std::int64_t t) const {
  return std::upper_bound(events.begin(), events.end(), t) - events.begin();
}

void validate_cascade(const Cascade& c) {
  for (std::size_t i = 0; i < c.events.size(); ++i) {
    if (c.events[i] < 0) {
      throw ValidationError("cascade '" + c.id + "': negative event offset " +
                            std::to_string(c.events[i]));
    }
    if (i > 0 && c.events[i] < c.events[i - 1]) {
      throw ValidationError("cascade '" + c.id +
                            "': events not in ascending order at position " +
                            std::to_string(i));
    }
  }
}

namespace {

Cascade parse_line(const std::string& line, std::size_t lineno) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what(), lineno);
  }
  if (!j.is_object() || j.size() != 3 || !j.contains("id") ||
      !j.contains("publish_ts") || !j.contains("events")) {
    throw ParseError("expected exactly the keys id, publish_ts, events", lineno);
  }
  const auto& id = j["id"];
  const auto& ts = j["publish_ts"];
  const auto& ev = j["events"];
  if (!id.is_string()) throw ParseError("id must be a string", lineno);
  if (!ts.is_number_integer()) throw ParseError("publish_ts must be an integer", lineno);
  if (!ev.is_array()) throw ParseError("events must be an array", lineno);

  Cascade c;
  c.id = id.get<std::string>();
  c.publish_ts = ts.get<std::int64_t>();
  c.events.reserve(ev.size());
  for (const auto& e : ev) {
    if (!e.is_number_integer()) {
      throw ParseError("cascade '" + c.id + "': events must be integers", lineno);
    }
    c.events.push_back(e.get<std::int64_t>());
  }
  validate_cascade(c);
  return c;
}

}  // namespace

std::vector<Cascade> read_cascades(std::istream& in) {
  std::vector<Cascade> out;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    Cascade c = parse_line(line, lineno);
    if (!seen.insert(c.id).second) {
      throw ValidationError("duplicate cascade id '" + c.id + "' at line " +
                            std::to_string(lineno));
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<Cascade> ingest_cascades(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open cascade file " + path.string());
  return read_cascades(in);
}

std::string to_json_line(const Cascade& c) {
  std::string s = "{\"id\":";
  s += json(c.id).dump();
  s += ",\"publish_ts\":";
  s += std::to_string(c.publish_ts);
  s += ",\"events\":[";
  for (std::size_t i = 0; i < c.events.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(c.events[i]);
  }
  s += "]}";
  return s;
}

void write_cascades(std::ostream& out, const std::vector<Cascade>& cascades) {
  for (const auto& c : cascades) out << to_json_line(c) << '\n';
}

void write_cascades(const std::filesystem::path& path,
                    const std::vector<Cascade>& cascades) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  write_cascades(out, cascades);
  if (!out) throw IoError("write failed for " + path.string());
}

namespace {

// floor/ceil of fraction*n, robust to products like 0.15*20 landing a hair
// off an integer.
std::size_t floor_share(double fraction, std::size_t n) {
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9));
}

std::size_t ceil_share(double fraction, std::size_t n) {
  return static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
}

}  // namespace

SplitManifest chronological_split(const std::vector<Cascade>& cascades,
                                  const SplitFractions& fractions) {
  const double sum = fractions.train + fractions.valid + fractions.test;
  if (std::abs(sum - 1.0) > 1e-9 || fractions.train < 0 || fractions.valid < 0 ||
      fractions.test < 0) {
    throw ValidationError("split fractions must be non-negative and sum to 1");
  }
  const std::size_t n = cascades.size();
  if (n < 3) {
    throw ValidationError("need at least 3 cascades to form train/valid/test splits, got " +
                          std::to_string(n));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& ca = cascades[a];
    const auto& cb = cascades[b];
    if (ca.publish_ts != cb.publish_ts) return ca.publish_ts < cb.publish_ts;
    return ca.id < cb.id;
  });

  const std::size_t n_train = floor_share(fractions.train, n);
  const std::size_t n_valid = floor_share(fractions.valid, n);
  if (n_train == 0 || n_valid == 0 || n_train + n_valid >= n) {
    throw ValidationError("fractions leave an empty split for " + std::to_string(n) +
                          " cascades");
  }

  SplitManifest m;
  m.fractions = fractions;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& id = cascades[order[i]].id;
    if (i < n_train) {
      m.train_ids.push_back(id);
    } else if (i < n_train + n_valid) {
      m.valid_ids.push_back(id);
    } else {
      m.test_ids.push_back(id);
    }
  }
  return m;
}

std::vector<std::string> label_budget(const std::vector<std::string>& train_ids,
                                      double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ValidationError("label fraction must be in (0, 1]");
  }
  const std::size_t n = train_ids.size();
  const std::size_t k = std::min(n, ceil_share(fraction, n));
  if (k == n) return train_ids;

  // Partial Fisher-Yates over indices, then restore original order.
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(derive_seed(seed, "label_budget"));
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.below(n - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  std::vector<std::string> out;
  out.reserve(k);
  for (std::size_t i : idx) out.push_back(train_ids[i]);
  return out;
}

SplitManifest label_budget(const SplitManifest& manifest, double fraction,
                           std::uint64_t seed) {
  SplitManifest m = manifest;
  m.train_ids = label_budget(manifest.train_ids, fraction, seed);
  m.label_fraction = fraction;
  m.label_seed = seed;
  return m;
}

std::string manifest_to_json(const SplitManifest& m) {
  json j;
  j["fractions"] = {m.fractions.train, m.fractions.valid, m.fractions.test};
  j["train_ids"] = m.train_ids;
  j["valid_ids"] = m.valid_ids;
  j["test_ids"] = m.test_ids;
  if (m.label_fraction) j["label_fraction"] = *m.label_fraction;
  if (m.label_seed) j["label_seed"] = *m.label_seed;
  return j.dump(2);
}

SplitManifest manifest_from_json(const std::string& text) {
  SplitManifest m;
  try {
    const json j = json::parse(text);
    const auto& f = j.at("fractions");
    m.fractions = {f.at(0).get<double>(), f.at(1).get<double>(), f.at(2).get<double>()};
    m.train_ids = j.at("train_ids").get<std::vector<std::string>>();
    m.valid_ids = j.at("valid_ids").get<std::vector<std::string>>();
    m.test_ids = j.at("test_ids").get<std::vector<std::string>>();
    if (j.contains("label_fraction")) m.label_fraction = j["label_fraction"].get<double>();
    if (j.contains("label_seed")) m.label_seed = j["label_seed"].get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad split manifest: ") + e.what(), 0);
  }
  return m;
}

}  // namespace popprep
