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

#include "grwm/mazeworld/maze.h"

#include <algorithm>
#include <array>

#include "grwm/common/errors.h"
#include "grwm/numcore/rng.h"

namespace grwm::mazeworld {

MazeMap::MazeMap(int width, int height) : width_(width), height_(height) {
  GRWM_REQUIRE(width >= 1 && height >= 1, "maze needs at least one cell");
  vwalls_.assign((width + 1) * height, 1);
  hwalls_.assign(width * (height + 1), 1);
  vcolors_.assign(vwalls_.size(), 0);
  hcolors_.assign(hwalls_.size(), 0);
}

MazeMap MazeMap::Open(int width, int height) {
  MazeMap m(width, height);
  for (int j = 0; j < height; ++j) {
    for (int i = 1; i < width; ++i) m.set_vwall(i, j, false);
  }
  for (int j = 1; j < height; ++j) {
    for (int i = 0; i < width; ++i) m.set_hwall(i, j, false);
  }
  return m;
}

bool MazeMap::Passable(Cell c, Dir4 d) const {
  const Cell n{c.x + DirDx(d), c.y + DirDy(d)};
  if (!InBounds(c) || !InBounds(n)) return false;
  switch (d) {
    case Dir4::kEast:
      return !vwall(c.x + 1, c.y);
    case Dir4::kWest:
      return !vwall(c.x, c.y);
    case Dir4::kNorth:
      return !hwall(c.x, c.y + 1);
    case Dir4::kSouth:
      return !hwall(c.x, c.y);
  }
  return false;
}

std::vector<Cell> MazeMap::Neighbours(Cell c) const {
  std::vector<Cell> out;
  for (int d = 0; d < 4; ++d) {
    if (Passable(c, Dir4(d))) {
      out.push_back({c.x + DirDx(Dir4(d)), c.y + DirDy(Dir4(d))});
    }
  }
  return out;
}

int MazeMap::WallCount() const {
  int n = 0;
  for (uint8_t w : vwalls_) n += w;
  for (uint8_t w : hwalls_) n += w;
  return n;
}

bool MazeMap::IsConnected() const {
  if (num_cells() == 0) return true;
  std::vector<uint8_t> seen(num_cells(), 0);
  std::vector<Cell> stack = {{0, 0}};
  seen[0] = 1;
  int reached = 1;
  while (!stack.empty()) {
    const Cell c = stack.back();
    stack.pop_back();
    for (Cell n : Neighbours(c)) {
      if (!seen[CellIndex(n)]) {
        seen[CellIndex(n)] = 1;
        ++reached;
        stack.push_back(n);
      }
    }
  }
  return reached == num_cells();
}

std::string MazeMap::ToText() const {
  std::string out;
  for (int row = 2 * height_; row >= 0; --row) {
    for (int col = 0; col <= 2 * width_; ++col) {
      char ch = ' ';
      if (row % 2 == 0 && col % 2 == 0) {
        ch = '+';
      } else if (row % 2 == 0) {
        const int i = col / 2, j = row / 2;
        if (hwall(i, j)) ch = char('0' + hcolor(i, j));
      } else if (col % 2 == 0) {
        const int i = col / 2, j = row / 2;
        if (vwall(i, j)) ch = char('0' + vcolor(i, j));
      }
      out += ch;
    }
    out += '\n';
  }
  return out;
}

int FullGridWallCount(int width, int height) {
  return (width + 1) * height + width * (height + 1);
}

int SpanningMazeWallCount(int width, int height) {
  return FullGridWallCount(width, height) - (width * height - 1);
}

int BoundaryWallCount(int width, int height) {
  return 2 * (width + height);
}

MazeMap GenerateMaze(uint64_t seed, int width, int height, double braid,
                     int palette_size) {
  GRWM_REQUIRE(width >= 2 && height >= 2, "maze must be at least 2x2");
  GRWM_REQUIRE(braid >= 0.0 && braid <= 1.0, "braid fraction in [0, 1]");
  GRWM_REQUIRE(palette_size >= 1 && palette_size <= 10, "palette size 1..10");
  numcore::RandomStream rng(seed, "maze/carve");
  MazeMap m(width, height);

  auto open_edge = [&m](Cell c, Dir4 d) {
    switch (d) {
      case Dir4::kEast:
        m.set_vwall(c.x + 1, c.y, false);
        break;
      case Dir4::kWest:
        m.set_vwall(c.x, c.y, false);
        break;
      case Dir4::kNorth:
        m.set_hwall(c.x, c.y + 1, false);
        break;
      case Dir4::kSouth:
        m.set_hwall(c.x, c.y, false);
        break;
    }
  };

  std::vector<uint8_t> visited(m.num_cells(), 0);
  const Cell start{static_cast<int>(rng.UniformInt(width)),
                   static_cast<int>(rng.UniformInt(height))};
  std::vector<Cell> stack = {start};
  visited[m.CellIndex(start)] = 1;
  while (!stack.empty()) {
    const Cell c = stack.back();
    std::array<Dir4, 4> options;
    int n = 0;
    for (int d = 0; d < 4; ++d) {
      const Cell nb{c.x + DirDx(Dir4(d)), c.y + DirDy(Dir4(d))};
      if (m.InBounds(nb) && !visited[m.CellIndex(nb)]) options[n++] = Dir4(d);
    }
    if (n == 0) {
      stack.pop_back();
      continue;
    }
    const Dir4 d = options[rng.UniformInt(n)];
    open_edge(c, d);
    const Cell nb{c.x + DirDx(d), c.y + DirDy(d)};
    visited[m.CellIndex(nb)] = 1;
    stack.push_back(nb);
  }

  if (braid > 0.0) {
    numcore::RandomStream braid_rng(seed, "maze/braid");
    for (int idx = 0; idx < m.num_cells(); ++idx) {
      const Cell c = m.CellAt(idx);
      const bool draw = braid_rng.Uniform() < braid;
      if (m.Neighbours(c).size() != 1 || !draw) continue;
      std::array<Dir4, 4> walled;
      int n = 0;
      for (int d = 0; d < 4; ++d) {
        const Cell nb{c.x + DirDx(Dir4(d)), c.y + DirDy(Dir4(d))};
        if (m.InBounds(nb) && !m.Passable(c, Dir4(d))) walled[n++] = Dir4(d);
      }
      if (n > 0) open_edge(c, walled[braid_rng.UniformInt(n)]);
    }
  }

  numcore::RandomStream color_rng(seed, "maze/colors");
  for (int j = 0; j < height; ++j) {
    for (int i = 0; i <= width; ++i) {
      m.set_vcolor(i, j, static_cast<uint8_t>(color_rng.UniformInt(palette_size)));
    }
  }
  for (int j = 0; j <= height; ++j) {
    for (int i = 0; i < width; ++i) {
      m.set_hcolor(i, j, static_cast<uint8_t>(color_rng.UniformInt(palette_size)));
    }
  }
  return m;
}

}  // namespace grwm::mazeworld
