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

#ifndef GRWM_MAZEWORLD_ENV_H_
#define GRWM_MAZEWORLD_ENV_H_

#include <array>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "grwm/mazeworld/maze.h"

namespace grwm::mazeworld {

enum class Action : uint8_t { kForward = 0, kTurnLeft = 1, kTurnRight = 2 };
inline constexpr int kNumActions = 3;
const char* ActionName(Action a);

struct Rgb {
  uint8_t r = 0, g = 0, b = 0;
  bool operator==(const Rgb&) const = default;
};

// Headings are binary angles: 2^32 units per revolution, so turning is exact
// modular integer arithmetic and left/right turns are exact inverses.
inline constexpr double kHeadingUnitsPerRadian =
    4294967296.0 / (2.0 * std::numbers::pi);

uint32_t HeadingFromRadians(double theta);
double RadiansFromHeading(uint32_t heading);

struct Pose {
  double x = 0.0;
  double y = 0.0;
  uint32_t heading = 0;

  double theta() const { return RadiansFromHeading(heading); }
  static Pose FromRadians(double x, double y, double theta) {
    return {x, y, HeadingFromRadians(theta)};
  }
  bool operator==(const Pose&) const = default;
};

// Exact for axis-aligned headings.
double HeadingCos(uint32_t heading);
double HeadingSin(uint32_t heading);

struct EnvConfig {
  double step_size = 0.25;
  double turn_increment = std::numbers::pi / 8.0;  // 22.5 degrees
  double fov = 66.0 * std::numbers::pi / 180.0;
  int frame_height = 32;
  int frame_width = 32;
  double margin = 0.1;
  std::vector<Rgb> palette = DefaultPalette();
  Rgb ceiling{40, 40, 48};
  Rgb floor{96, 88, 80};

  static std::vector<Rgb> DefaultPalette();
  uint32_t turn_units() const { return HeadingFromRadians(turn_increment); }
  // Throws ContractViolation on out-of-range values.
  void Validate() const;
  // FNV-1a over a canonical encoding of every field.
  uint64_t Digest() const;
};

// Rendered observation, row 0 at the top, interleaved RGB.
struct Frame {
  int height = 0;
  int width = 0;
  std::vector<uint8_t> rgb;

  uint8_t at(int row, int col, int ch) const {
    return rgb[(size_t(row) * width + col) * 3 + ch];
  }
  bool operator==(const Frame&) const = default;
};

// True when the agent's collision square (half-size `margin`) is inside the
// map and touches no wall.
bool IsValidPose(const MazeMap& map, const Pose& pose, double margin);

// Deterministic transition. Forward motion resolves x then y, keeping the
// previous coordinate on collision.
Pose Step(const MazeMap& map, const Pose& pose, Action action,
          const EnvConfig& cfg);

// Column-per-pixel raycast.
Frame Render(const MazeMap& map, const Pose& pose, const EnvConfig& cfg);

// Wall pixels in one column of a frame (rows not matching floor/ceiling).
int WallPixelsInColumn(const Frame& f, int col, const EnvConfig& cfg);

// (x, y, sin(theta), cos(theta)) with x, y mapped affinely from [0, extent]
// to [-1, 1].
std::array<double, 4> OracleState(const Pose& pose, const MazeMap& map);
// Inverse of OracleState; heading from atan2 of the last two components.
Pose PoseFromOracleState(const std::array<double, 4>& s, const MazeMap& map);

std::vector<uint8_t> EncodePpm(const Frame& f);
void WritePpm(const std::string& path, const Frame& f);
// Frames side by side.
Frame ConcatFramesHorizontally(const std::vector<Frame>& frames);

}  // namespace grwm::mazeworld

#endif  // GRWM_MAZEWORLD_ENV_H_
