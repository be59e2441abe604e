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

#include <cstring>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "popprep/checkpoint.hpp"

using namespace popprep;

namespace {

ModelConfig tiny() {
  ModelConfig cfg;
  cfg.layers = 1;
  cfg.kernel_size = 2;
  cfg.hidden_channels = 1;
  cfg.mlp_hidden = 1;
  return cfg;
}

CheckpointError::Kind kind_of(const std::string& bytes,
                              const std::optional<ModelConfig>& expected = std::nullopt) {
  try {
    checkpoint_from_bytes(bytes, expected);
  } catch (const CheckpointError& e) {
    return e.kind();
  }
  FAIL("expected CheckpointError");
  return CheckpointError::Kind::kIo;
}

}  // namespace

TEST_CASE("byte layout: JSON header line then little-endian float64 payload") {
  ModelParams p(tiny());
  double v = 0.25;
  for (auto& t : p.tensors()) {
    for (double& x : t.data) {
      x = v;
      v += 1.0;
    }
  }
  const std::string bytes = checkpoint_bytes(p);
  const auto nl = bytes.find('\n');
  REQUIRE(nl != std::string::npos);
  const std::string header = bytes.substr(0, nl);
  CHECK(header.find("\"format\":\"popprep-checkpoint\"") != std::string::npos);
  CHECK(header.find("\"version\":1") != std::string::npos);
  CHECK(header.find("\"name\":\"conv0.weight\",\"shape\":[1,1,2]") != std::string::npos);
  const std::size_t n = p.scalar_count();
  REQUIRE(bytes.size() == nl + 1 + 8 * n);
  // 0.25 = 0x3FD0000000000000, little-endian.
  const unsigned char expected[8] = {0, 0, 0, 0, 0, 0, 0xD0, 0x3F};
  CHECK(std::memcmp(bytes.data() + nl + 1, expected, 8) == 0);
}

TEST_CASE("round trip is bit-exact and byte-stable") {
  ModelConfig cfg;
  cfg.seed = 17;
  const ModelParams p = ModelParams::initialize(cfg);
  const std::string bytes = checkpoint_bytes(p);
  const ModelParams back = checkpoint_from_bytes(bytes, cfg);
  CHECK(back == p);
  CHECK(back.config() == cfg);
  CHECK(checkpoint_bytes(back) == bytes);

  const auto path = std::filesystem::temp_directory_path() / "popprep_ckpt_test.bin";
  save_checkpoint(p, path);
  CHECK(load_checkpoint(path) == p);
  std::filesystem::remove(path);
}

TEST_CASE("distinct errors for each corruption") {
  const ModelParams p = ModelParams::initialize(tiny());
  const std::string good = checkpoint_bytes(p);
  const auto nl = good.find('\n');

  CHECK(kind_of("not a header\n") == CheckpointError::Kind::kCorruptHeader);
  CHECK(kind_of("") == CheckpointError::Kind::kCorruptHeader);

  std::string version = good;
  version.replace(version.find("\"version\":1"), 11, "\"version\":9");
  CHECK(kind_of(version) == CheckpointError::Kind::kVersionMismatch);

  ModelConfig other = tiny();
  other.mlp_hidden = 2;
  CHECK(kind_of(good, other) == CheckpointError::Kind::kConfigMismatch);

  std::string shape = good;
  shape.replace(shape.find("[1,1,2]"), 7, "[1,2,1]");
  CHECK(kind_of(shape) == CheckpointError::Kind::kShapeMismatch);

  CHECK(kind_of(good.substr(0, good.size() - 3)) == CheckpointError::Kind::kTruncatedPayload);
  CHECK(kind_of(good + "x") == CheckpointError::Kind::kTrailingBytes);
  CHECK(nl > 0);

  try {
    load_checkpoint("/nonexistent/ckpt.bin");
    FAIL("expected error");
  } catch (const CheckpointError& e) {
    CHECK(e.kind() == CheckpointError::Kind::kIo);
  }
}
