// Copyright 2026 The GRWM Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef GRWM_NUMCORE_RNG_H_
#define GRWM_NUMCORE_RNG_H_

#include <array>
#include <cstdint>
#include <string_view>

namespace grwm::numcore {

// FNV-1a, used to turn stream labels into key material.
uint64_t HashLabel(std::string_view label);

// Philox4x32-10 block function.
std::array<uint32_t, 4> Philox4x32(std::array<uint32_t, 4> counter,
                                   std::array<uint32_t, 2> key);

// Counter-based random stream keyed by (run seed, label, step). Draws are a
// pure function of (seed, label, step, draw index), so streams can be split
// across workers without coordination.
class RandomStream {
 public:
  RandomStream(uint64_t seed, std::string_view label, uint64_t step = 0);

  uint64_t NextU64();
  // Uniform in [0, 1).
  double Uniform();
  // Uniform integer in [0, n).
  uint64_t UniformInt(uint64_t n);
  double Normal();

  uint64_t seed() const { return seed_; }
  uint64_t draws() const { return index_; }

  // Derive a child stream; children with different labels are independent.
  RandomStream Fork(std::string_view label, uint64_t step = 0) const;

 private:
  uint64_t seed_;
  std::array<uint32_t, 2> key_;
  uint64_t step_;
  uint64_t index_ = 0;
  std::array<uint32_t, 4> block_{};
  int block_pos_ = 4;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;

  uint32_t NextU32();
};

}  // namespace grwm::numcore

#endif  // GRWM_NUMCORE_RNG_H_
