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

#include "popprep/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "json.hpp"

namespace popprep {

using nlohmann::json;
using Kind = CheckpointError::Kind;

namespace {

json config_to_json(const ModelConfig& c) {
  return json{{"kernel_size", c.kernel_size},     {"layers", c.layers},
              {"hidden_channels", c.hidden_channels}, {"mlp_hidden", c.mlp_hidden},
              {"dropout", c.dropout},             {"dilation_base", c.dilation_base},
              {"input_channels", c.input_channels}, {"seed", c.seed}};
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  c.kernel_size = j.at("kernel_size").get<int>();
  c.layers = j.at("layers").get<int>();
  c.hidden_channels = j.at("hidden_channels").get<int>();
  c.mlp_hidden = j.at("mlp_hidden").get<int>();
  c.dropout = j.at("dropout").get<double>();
  c.dilation_base = j.at("dilation_base").get<int>();
  c.input_channels = j.at("input_channels").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

void put_le(std::string& out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<char>(bits & 0xff));
    bits >>= 8;
  }
}

double get_le(const char* p) {
  std::uint64_t bits = 0;
  for (int i = 7; i >= 0; --i) {
    bits = (bits << 8) | static_cast<unsigned char>(p[i]);
  }
  return std::bit_cast<double>(bits);
}

}  // namespace

std::string checkpoint_bytes(const ModelParams& params) {
  json tensors = json::array();
  for (const auto& t : params.tensors()) {
    tensors.push_back(json{{"name", t.name}, {"shape", t.shape}});
  }
  const json header{{"format", "popprep-checkpoint"},
                    {"version", kCheckpointVersion},
                    {"config", config_to_json(params.config())},
                    {"tensors", tensors}};
  std::string out = header.dump();
  out.push_back('\n');
  out.reserve(out.size() + params.scalar_count() * 8);
  for (const auto& t : params.tensors()) {
    for (double v : t.data) put_le(out, v);
  }
  return out;
}

ModelParams checkpoint_from_bytes(const std::string& bytes,
                                  const std::optional<ModelConfig>& expected) {
  const auto nl = bytes.find('\n');
  if (nl == std::string::npos) {
    throw CheckpointError(Kind::kCorruptHeader, "checkpoint header line missing");
  }
  json header;
  ModelConfig cfg;
  try {
    header = json::parse(bytes.substr(0, nl));
    if (header.at("format").get<std::string>() != "popprep-checkpoint") {
      throw CheckpointError(Kind::kCorruptHeader, "not a popprep checkpoint");
    }
  } catch (const json::exception& e) {
    throw CheckpointError(Kind::kCorruptHeader,
                          std::string("corrupt checkpoint header: ") + e.what());
  }
  int version = 0;
  try {
    version = header.at("version").get<int>();
  } catch (const json::exception& e) {
    throw CheckpointError(Kind::kCorruptHeader, "checkpoint header has no version");
  }
  if (version != kCheckpointVersion) {
    throw CheckpointError(Kind::kVersionMismatch,
                          "checkpoint version " + std::to_string(version) + ", expected " +
                              std::to_string(kCheckpointVersion));
  }
  try {
    cfg = config_from_json(header.at("config"));
    cfg.validate();
  } catch (const std::exception& e) {
    throw CheckpointError(Kind::kCorruptHeader, std::string("bad checkpoint config: ") + e.what());
  }
  if (expected && !(*expected == cfg)) {
    throw CheckpointError(Kind::kConfigMismatch,
                          "checkpoint model config differs from the configured model");
  }

  ModelParams params(cfg);
  try {
    const auto& table = header.at("tensors");
    if (!table.is_array() || table.size() != params.size()) {
      throw CheckpointError(Kind::kConfigMismatch,
                            "tensor table has " + std::to_string(table.size()) +
                                " entries, config implies " + std::to_string(params.size()));
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
      const auto name = table[i].at("name").get<std::string>();
      const auto shape = table[i].at("shape").get<std::vector<std::size_t>>();
      if (name != params[i].name || shape != params[i].shape) {
        throw CheckpointError(Kind::kShapeMismatch,
                              "tensor " + std::to_string(i) + " (" + name +
                                  ") does not match config layout " + params[i].name);
      }
    }
  } catch (const json::exception& e) {
    throw CheckpointError(Kind::kCorruptHeader, std::string("bad tensor table: ") + e.what());
  }

  const std::size_t need = params.scalar_count() * 8;
  const std::size_t have = bytes.size() - nl - 1;
  if (have < need) {
    throw CheckpointError(Kind::kTruncatedPayload,
                          "checkpoint payload truncated: " + std::to_string(have) + " of " +
                              std::to_string(need) + " bytes");
  }
  if (have > need) {
    throw CheckpointError(Kind::kTrailingBytes, "unexpected bytes after checkpoint payload");
  }
  const char* p = bytes.data() + nl + 1;
  for (auto& t : params.tensors()) {
    for (double& v : t.data) {
      v = get_le(p);
      p += 8;
    }
  }
  return params;
}

void save_checkpoint(const ModelParams& params, const std::filesystem::path& path) {
  const std::string bytes = checkpoint_bytes(params);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError(Kind::kIo, "cannot write checkpoint " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError(Kind::kIo, "write failed for " + path.string());
}

ModelParams load_checkpoint(const std::filesystem::path& path,
                            const std::optional<ModelConfig>& expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(Kind::kIo, "cannot open checkpoint " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return checkpoint_from_bytes(bytes, expected);
}

}  // namespace popprep
