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

#include "grwm/mazeworld/env.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "grwm/common/errors.h"
#include "grwm/numcore/rng.h"

namespace grwm::mazeworld {
namespace {

constexpr uint32_t kQuarterTurn = 1u << 30;

double Shade(double perp_dist, bool y_side) {
  const double s = 1.0 / (1.0 + 0.25 * perp_dist);
  return y_side ? 0.75 * s : s;
}

uint8_t ToByte(double v) {
  return static_cast<uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
}

bool HitsVertical(const MazeMap& m, double x, double y, double margin, int i,
                  int j) {
  if (i < 0 || i > m.width() || j < 0 || j >= m.height()) return false;
  if (!m.vwall(i, j)) return false;
  return std::abs(x - i) < margin && y + margin > j && y - margin < j + 1;
}

bool HitsHorizontal(const MazeMap& m, double x, double y, double margin, int i,
                    int j) {
  if (i < 0 || i >= m.width() || j < 0 || j > m.height()) return false;
  if (!m.hwall(i, j)) return false;
  return std::abs(y - j) < margin && x + margin > i && x - margin < i + 1;
}

}  // namespace

const char* ActionName(Action a) {
  switch (a) {
    case Action::kForward:
      return "forward";
    case Action::kTurnLeft:
      return "turn_left";
    case Action::kTurnRight:
      return "turn_right";
  }
  return "?";
}

uint32_t HeadingFromRadians(double theta) {
  const double turns = theta / (2.0 * std::numbers::pi);
  const double frac = turns - std::floor(turns);
  const double units = std::nearbyint(frac * 4294967296.0);
  return static_cast<uint32_t>(static_cast<uint64_t>(units) & 0xFFFFFFFFull);
}

double RadiansFromHeading(uint32_t heading) {
  return double(heading) / kHeadingUnitsPerRadian;
}

double HeadingCos(uint32_t heading) {
  if (heading % kQuarterTurn == 0) {
    static constexpr double kCos[4] = {1.0, 0.0, -1.0, 0.0};
    return kCos[heading / kQuarterTurn];
  }
  return std::cos(RadiansFromHeading(heading));
}

double HeadingSin(uint32_t heading) {
  if (heading % kQuarterTurn == 0) {
    static constexpr double kSin[4] = {0.0, 1.0, 0.0, -1.0};
    return kSin[heading / kQuarterTurn];
  }
  return std::sin(RadiansFromHeading(heading));
}

std::vector<Rgb> EnvConfig::DefaultPalette() {
  return {{200, 60, 60},  {60, 170, 70},  {70, 90, 210},
          {220, 200, 60}, {200, 80, 190}, {70, 190, 200}};
}

void EnvConfig::Validate() const {
  GRWM_REQUIRE(step_size > 0.0 && step_size < 1.0, "step size in (0, 1)");
  GRWM_REQUIRE(turn_increment > 0.0 && turn_increment < std::numbers::pi,
               "turn increment in (0, pi)");
  GRWM_REQUIRE(fov > 0.0 && fov < std::numbers::pi, "fov in (0, pi)");
  GRWM_REQUIRE(frame_height >= 4 && frame_width >= 4 &&
                   frame_height <= 64 && frame_width <= 64,
               "frame dims in [4, 64]");
  GRWM_REQUIRE(margin > 0.0 && margin < 0.5, "margin in (0, 0.5)");
  GRWM_REQUIRE(!palette.empty() && palette.size() <= 10, "palette size 1..10");
}

uint64_t EnvConfig::Digest() const {
  uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&h](const void* p, size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 0x100000001b3ull;
    }
  };
  mix(&step_size, sizeof step_size);
  mix(&turn_increment, sizeof turn_increment);
  mix(&fov, sizeof fov);
  mix(&frame_height, sizeof frame_height);
  mix(&frame_width, sizeof frame_width);
  mix(&margin, sizeof margin);
  for (const Rgb& c : palette) mix(&c, sizeof c);
  mix(&ceiling, sizeof ceiling);
  mix(&floor, sizeof floor);
  return h;
}

bool IsValidPose(const MazeMap& map, const Pose& pose, double margin) {
  const double x = pose.x, y = pose.y;
  if (!(x - margin > 0.0 && y - margin > 0.0 && x + margin < map.width() &&
        y + margin < map.height())) {
    return false;
  }
  const int cx = static_cast<int>(std::floor(x));
  const int cy = static_cast<int>(std::floor(y));
  for (int dj = -1; dj <= 1; ++dj) {
    for (int di = -1; di <= 2; ++di) {
      if (HitsVertical(map, x, y, margin, cx + di, cy + dj)) return false;
    }
  }
  for (int dj = -1; dj <= 2; ++dj) {
    for (int di = -1; di <= 1; ++di) {
      if (HitsHorizontal(map, x, y, margin, cx + di, cy + dj)) return false;
    }
  }
  return true;
}

Pose Step(const MazeMap& map, const Pose& pose, Action action,
          const EnvConfig& cfg) {
  GRWM_REQUIRE(IsValidPose(map, pose, cfg.margin), "pose is not valid");
  Pose next = pose;
  switch (action) {
    case Action::kTurnLeft:
      next.heading = pose.heading + cfg.turn_units();
      return next;
    case Action::kTurnRight:
      next.heading = pose.heading - cfg.turn_units();
      return next;
    case Action::kForward:
      break;
  }
  const double nx = pose.x + cfg.step_size * HeadingCos(pose.heading);
  if (IsValidPose(map, {nx, next.y, next.heading}, cfg.margin)) next.x = nx;
  const double ny = pose.y + cfg.step_size * HeadingSin(pose.heading);
  if (IsValidPose(map, {next.x, ny, next.heading}, cfg.margin)) next.y = ny;
  return next;
}

Frame Render(const MazeMap& map, const Pose& pose, const EnvConfig& cfg) {
  const int h = cfg.frame_height, w = cfg.frame_width;
  Frame f{h, w, std::vector<uint8_t>(size_t(h) * w * 3)};
  const double dir_x = HeadingCos(pose.heading);
  const double dir_y = HeadingSin(pose.heading);
  const double plane = std::tan(cfg.fov / 2.0);
  // Camera plane points to the agent's right.
  const double right_x = dir_y * plane, right_y = -dir_x * plane;

  for (int col = 0; col < w; ++col) {
    const double cam = 2.0 * (col + 0.5) / w - 1.0;
    const double rx = dir_x + right_x * cam;
    const double ry = dir_y + right_y * cam;
    int cx = static_cast<int>(std::floor(pose.x));
    int cy = static_cast<int>(std::floor(pose.y));
    const double ddx = rx == 0.0 ? 1e30 : std::abs(1.0 / rx);
    const double ddy = ry == 0.0 ? 1e30 : std::abs(1.0 / ry);
    const int sx = rx < 0 ? -1 : 1;
    const int sy = ry < 0 ? -1 : 1;
    double side_x = rx < 0 ? (pose.x - cx) * ddx : (cx + 1.0 - pose.x) * ddx;
    double side_y = ry < 0 ? (pose.y - cy) * ddy : (cy + 1.0 - pose.y) * ddy;
    double perp = 1e30;
    bool y_side = false;
    uint8_t color = 0;
    for (int iter = 0; iter < 4 * (map.width() + map.height()) + 8; ++iter) {
      if (side_x < side_y) {
        const int line = sx > 0 ? cx + 1 : cx;
        if (line < 0 || line > map.width() || cy < 0 || cy >= map.height() ||
            map.vwall(line, cy)) {
          perp = side_x;
          y_side = false;
          if (line >= 0 && line <= map.width() && cy >= 0 &&
              cy < map.height()) {
            color = map.vcolor(line, cy);
          }
          break;
        }
        side_x += ddx;
        cx += sx;
      } else {
        const int line = sy > 0 ? cy + 1 : cy;
        if (line < 0 || line > map.height() || cx < 0 || cx >= map.width() ||
            map.hwall(cx, line)) {
          perp = side_y;
          y_side = true;
          if (line >= 0 && line <= map.height() && cx >= 0 &&
              cx < map.width()) {
            color = map.hcolor(cx, line);
          }
          break;
        }
        side_y += ddy;
        cy += sy;
      }
    }
    perp = std::max(perp, 1e-6);
    const double line_h = h / perp;
    const double top = h / 2.0 - line_h / 2.0;
    const double bottom = h / 2.0 + line_h / 2.0;
    const Rgb base = cfg.palette[color % cfg.palette.size()];
    const double shade = Shade(perp, y_side);
    for (int row = 0; row < h; ++row) {
      const double yc = row + 0.5;
      Rgb px;
      if (yc >= top && yc < bottom) {
        px = {ToByte(base.r * shade), ToByte(base.g * shade),
              ToByte(base.b * shade)};
      } else if (yc < top) {
        px = cfg.ceiling;
      } else {
        // Floor darkens toward the horizon.
        const double depth = (yc - h / 2.0) / (h / 2.0);
        const double s = 0.45 + 0.55 * depth;
        px = {ToByte(cfg.floor.r * s), ToByte(cfg.floor.g * s),
              ToByte(cfg.floor.b * s)};
      }
      uint8_t* dst = &f.rgb[(size_t(row) * w + col) * 3];
      dst[0] = px.r;
      dst[1] = px.g;
      dst[2] = px.b;
    }
  }
  return f;
}

int WallPixelsInColumn(const Frame& f, int col, const EnvConfig& cfg) {
  int n = 0;
  for (int row = 0; row < f.height; ++row) {
    const Rgb px{f.at(row, col, 0), f.at(row, col, 1), f.at(row, col, 2)};
    if (row < f.height / 2) {
      if (!(px == cfg.ceiling)) ++n;
    } else {
      const double depth = (row + 0.5 - f.height / 2.0) / (f.height / 2.0);
      const double s = 0.45 + 0.55 * depth;
      const Rgb fl{ToByte(cfg.floor.r * s), ToByte(cfg.floor.g * s),
                   ToByte(cfg.floor.b * s)};
      if (!(px == fl)) ++n;
    }
  }
  return n;
}

std::array<double, 4> OracleState(const Pose& pose, const MazeMap& map) {
  return {2.0 * pose.x / map.width() - 1.0, 2.0 * pose.y / map.height() - 1.0,
          HeadingSin(pose.heading), HeadingCos(pose.heading)};
}

Pose PoseFromOracleState(const std::array<double, 4>& s, const MazeMap& map) {
  return Pose::FromRadians((s[0] + 1.0) * 0.5 * map.width(),
                           (s[1] + 1.0) * 0.5 * map.height(),
                           std::atan2(s[2], s[3]));
}

std::vector<uint8_t> EncodePpm(const Frame& f) {
  const std::string header = "P6\n" + std::to_string(f.width) + " " +
                             std::to_string(f.height) + "\n255\n";
  std::vector<uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), f.rgb.begin(), f.rgb.end());
  return out;
}

void WritePpm(const std::string& path, const Frame& f) {
  const std::vector<uint8_t> bytes = EncodePpm(f);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError(FormatErrorKind::kIo, "cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

Frame ConcatFramesHorizontally(const std::vector<Frame>& frames) {
  GRWM_REQUIRE(!frames.empty(), "no frames");
  const int h = frames[0].height;
  int total_w = 0;
  for (const Frame& f : frames) {
    GRWM_REQUIRE(f.height == h, "frame heights differ");
    total_w += f.width;
  }
  Frame out{h, total_w, std::vector<uint8_t>(size_t(h) * total_w * 3)};
  int x0 = 0;
  for (const Frame& f : frames) {
    for (int row = 0; row < h; ++row) {
      std::memcpy(&out.rgb[(size_t(row) * total_w + x0) * 3],
                  &f.rgb[size_t(row) * f.width * 3], size_t(f.width) * 3);
    }
    x0 += f.width;
  }
  return out;
}

}  // namespace grwm::mazeworld
