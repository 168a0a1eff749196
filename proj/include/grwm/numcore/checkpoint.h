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

#ifndef GRWM_NUMCORE_CHECKPOINT_H_
#define GRWM_NUMCORE_CHECKPOINT_H_

#include <cstdint>
#include <string>
#include <vector>

#include "grwm/numcore/params.h"

namespace grwm::numcore {

inline constexpr char kCheckpointMagic[4] = {'G', 'R', 'W', 'M'};
inline constexpr uint32_t kCheckpointVersion = 1;

// Layout (little-endian): magic "GRWM", u32 version, u32 array count, then
// per array: u32 name length, UTF-8 name, u32 rank, rank x u64 extents,
// f32 values.
std::vector<uint8_t> EncodeCheckpoint(const std::vector<NamedArray>& arrays);
std::vector<NamedArray> DecodeCheckpoint(const std::vector<uint8_t>& bytes);

void WriteCheckpoint(const std::string& path,
                     const std::vector<NamedArray>& arrays);
std::vector<NamedArray> ReadCheckpoint(const std::string& path);

// Whole-file helpers shared by the binary formats.
std::vector<uint8_t> ReadFileBytes(const std::string& path);
void WriteFileBytes(const std::string& path, const std::vector<uint8_t>& bytes);

}  // namespace grwm::numcore

#endif  // GRWM_NUMCORE_CHECKPOINT_H_
