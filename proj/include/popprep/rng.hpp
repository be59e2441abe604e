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

#ifndef POPPREP_RNG_HPP_
#define POPPREP_RNG_HPP_

#include <cstdint>
#include <random>
#include <string_view>

namespace popprep {

std::uint64_t splitmix64(std::uint64_t x);

// Named seed derivation: every random stream in the project is reached from
// one root seed through (component, index) pairs.
std::uint64_t derive_seed(std::uint64_t root, std::string_view component,
                          std::uint64_t index = 0);

// Thin wrapper over mt19937_64. The distribution transforms are written out
// here instead of using <random> distributions, whose output is
// implementation-defined, so streams are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // [0, 1) with 53 random bits.
  double uniform();
  // (0, 1]
  double uniform_open_low() { return 1.0 - uniform(); }
  // Uniform integer in [0, n). n > 0.
  std::uint64_t below(std::uint64_t n);
  double normal();
  double exponential(double rate);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace popprep

#endif  // POPPREP_RNG_HPP_
