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

#ifndef POPPREP_CHECKPOINT_HPP_
#define POPPREP_CHECKPOINT_HPP_

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include "popprep/tcn.hpp"

namespace popprep {

// File layout: one JSON header line
//   {"config":{...},"format":"popprep-checkpoint","tensors":[{"name":..,"shape":[..]},..],"version":1}
// followed by every tensor's values as little-endian IEEE-754 binary64, in
// header order.
inline constexpr int kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  enum class Kind { kIo, kCorruptHeader, kVersionMismatch, kConfigMismatch, kShapeMismatch,
                    kTruncatedPayload, kTrailingBytes };
  CheckpointError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

std::string checkpoint_bytes(const ModelParams& params);
ModelParams checkpoint_from_bytes(const std::string& bytes,
                                  const std::optional<ModelConfig>& expected = std::nullopt);

void save_checkpoint(const ModelParams& params, const std::filesystem::path& path);
// When `expected` is given, the stored config must match it exactly.
ModelParams load_checkpoint(const std::filesystem::path& path,
                            const std::optional<ModelConfig>& expected = std::nullopt);

}  // namespace popprep

#endif  // POPPREP_CHECKPOINT_HPP_
