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

#ifndef GRWM_TRAJECTORIES_DATASET_H_
#define GRWM_TRAJECTORIES_DATASET_H_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "grwm/mazeworld/env.h"
#include "grwm/mazeworld/maze.h"

namespace grwm::trajectories {

// Which maze a dataset was collected in.
struct MazeSpec {
  uint64_t seed = 7;
  int width = 3;
  int height = 3;
  double braid = 0.0;

  mazeworld::MazeMap Build(int palette_size) const {
    return mazeworld::GenerateMaze(seed, width, height, braid, palette_size);
  }
  bool operator==(const MazeSpec&) const = default;
};

// Step t records the observation o_t at pose s_t and the action a_t taken
// from it, so Step(s_t, a_t) == s_{t+1}.
struct Trajectory {
  std::vector<mazeworld::Action> actions;
  std::vector<mazeworld::Frame> frames;
  std::vector<mazeworld::Pose> poses;
  uint64_t map_seed = 0;
  uint64_t policy_seed = 0;

  int length() const { return static_cast<int>(actions.size()); }
};

struct CollectConfig {
  int count = 200;
  int length = 128;
  double epsilon = 0.2;
  uint64_t seed = 1;
  // > 1 collects on worker threads; output is identical to serial collection.
  int workers = 1;
};

// Noisy A*: follow shortest paths to random goal cells, replacing each action
// by a uniformly random one with probability epsilon. Fully determined by
// (map, cfg, policy_seed, length, epsilon).
Trajectory CollectTrajectory(const mazeworld::MazeMap& map,
                             const mazeworld::EnvConfig& cfg,
                             uint64_t map_seed, uint64_t policy_seed,
                             int length, double epsilon);

// Seed of trajectory `index` under collection seed `seed`.
uint64_t PolicySeed(uint64_t seed, int index);

inline constexpr char kDatasetMagic[4] = {'G', 'R', 'W', 'D'};
inline constexpr uint32_t kDatasetVersion = 1;

struct DatasetHeader {
  uint32_t count = 0;
  uint32_t length = 0;
  uint32_t height = 0;
  uint32_t width = 0;
  uint32_t channels = 3;
  uint64_t env_digest = 0;
  MazeSpec maze;

  bool operator==(const DatasetHeader&) const = default;
};

struct Dataset {
  DatasetHeader header;
  std::vector<Trajectory> trajectories;
};

Dataset CollectDataset(const MazeSpec& maze, const mazeworld::EnvConfig& cfg,
                       const CollectConfig& collect);

// Little-endian layout: magic "GRWD", u32 version, u32 count, u32 T, u32 H,
// u32 W, u32 C, u64 env digest, u64 map seed, u32 maze width, u32 maze
// height, f64 braid; then per trajectory: u64 map seed, u64 policy seed,
// T x u8 actions, T*H*W*C u8 frames, T x 3 f64 poses (x, y, theta).
std::vector<uint8_t> EncodeDataset(const Dataset& ds);
// `expected_env`, when given, must match the header digest.
Dataset DecodeDataset(const std::vector<uint8_t>& bytes,
                      const mazeworld::EnvConfig* expected_env = nullptr);

void WriteDataset(const std::string& path, const Dataset& ds);
Dataset ReadDataset(const std::string& path,
                    const mazeworld::EnvConfig* expected_env = nullptr);

// Disjoint, exhaustive split at trajectory granularity; `fraction` is the
// share that goes to the first (training) part.
std::pair<std::vector<int>, std::vector<int>> Split(int count, double fraction,
                                                    uint64_t seed);

// Re-simulates every trajectory from its first pose; returns the index of the
// first mismatching trajectory or -1.
int FirstReplayMismatch(const Dataset& ds, const mazeworld::MazeMap& map,
                        const mazeworld::EnvConfig& cfg);

struct CoverageReport {
  int cells_total = 0;
  int cells_visited = 0;
  std::array<int64_t, mazeworld::kNumActions> action_counts{};
  std::vector<int> visits_per_cell;
};

CoverageReport Coverage(const Dataset& ds, const mazeworld::MazeMap& map);

}  // namespace grwm::trajectories

#endif  // GRWM_TRAJECTORIES_DATASET_H_
