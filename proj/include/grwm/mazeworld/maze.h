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

#ifndef GRWM_MAZEWORLD_MAZE_H_
#define GRWM_MAZEWORLD_MAZE_H_

#include <cstdint>
#include <string>
#include <vector>

namespace grwm::mazeworld {

// Cardinal directions in counter-clockwise order; a left turn adds one.
enum class Dir4 : uint8_t { kEast = 0, kNorth = 1, kWest = 2, kSouth = 3 };

inline Dir4 TurnLeft(Dir4 d) { return Dir4((int(d) + 1) % 4); }
inline Dir4 TurnRight(Dir4 d) { return Dir4((int(d) + 3) % 4); }
inline int DirDx(Dir4 d) { return d == Dir4::kEast ? 1 : d == Dir4::kWest ? -1 : 0; }
inline int DirDy(Dir4 d) { return d == Dir4::kNorth ? 1 : d == Dir4::kSouth ? -1 : 0; }

struct Cell {
  int x = 0;
  int y = 0;
  bool operator==(const Cell&) const = default;
};

// Grid of unit cells; cell (i, j) covers [i, i+1] x [j, j+1]. Walls are
// zero-thickness segments on cell edges, each with a palette color index.
class MazeMap {
 public:
  MazeMap() = default;
  // Every edge walled.
  MazeMap(int width, int height);
  // Boundary walls only.
  static MazeMap Open(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }
  int num_cells() const { return width_ * height_; }

  // Segment on the line x = i covering y in [j, j+1]; 0 <= i <= width.
  bool vwall(int i, int j) const { return vwalls_[VIndex(i, j)] != 0; }
  // Segment on the line y = j covering x in [i, i+1]; 0 <= j <= height.
  bool hwall(int i, int j) const { return hwalls_[HIndex(i, j)] != 0; }
  void set_vwall(int i, int j, bool on) { vwalls_[VIndex(i, j)] = on; }
  void set_hwall(int i, int j, bool on) { hwalls_[HIndex(i, j)] = on; }

  uint8_t vcolor(int i, int j) const { return vcolors_[VIndex(i, j)]; }
  uint8_t hcolor(int i, int j) const { return hcolors_[HIndex(i, j)]; }
  void set_vcolor(int i, int j, uint8_t c) { vcolors_[VIndex(i, j)] = c; }
  void set_hcolor(int i, int j, uint8_t c) { hcolors_[HIndex(i, j)] = c; }

  bool InBounds(Cell c) const {
    return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_;
  }
  // True when no wall separates `c` from its neighbour in direction `d`.
  bool Passable(Cell c, Dir4 d) const;
  std::vector<Cell> Neighbours(Cell c) const;

  int WallCount() const;
  bool IsConnected() const;
  int CellIndex(Cell c) const { return c.y * width_ + c.x; }
  Cell CellAt(int index) const { return {index % width_, index / width_}; }

  // (2H+1) lines of (2W+1) chars, top row = largest y. Walls print as their
  // palette digit, posts as '+', open edges and cells as ' '.
  std::string ToText() const;

  bool operator==(const MazeMap&) const = default;

 private:
  int VIndex(int i, int j) const { return j * (width_ + 1) + i; }
  int HIndex(int i, int j) const { return j * width_ + i; }

  int width_ = 0;
  int height_ = 0;
  std::vector<uint8_t> vwalls_;
  std::vector<uint8_t> hwalls_;
  std::vector<uint8_t> vcolors_;
  std::vector<uint8_t> hcolors_;
};

// Full-grid wall count, and the count left by a perfect (spanning-tree) maze.
int FullGridWallCount(int width, int height);
int SpanningMazeWallCount(int width, int height);
int BoundaryWallCount(int width, int height);

// Randomized depth-first carving followed by braiding: each dead end loses
// one extra wall with probability `braid`. Wall colors are drawn uniformly
// from `palette_size` entries. Pure function of its arguments.
MazeMap GenerateMaze(uint64_t seed, int width, int height, double braid = 0.0,
                     int palette_size = 6);

}  // namespace grwm::mazeworld

#endif  // GRWM_MAZEWORLD_MAZE_H_
