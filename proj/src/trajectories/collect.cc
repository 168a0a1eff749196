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

#include <cmath>
#include <thread>

#include "grwm/common/errors.h"
#include "grwm/numcore/rng.h"
#include "grwm/trajectories/dataset.h"
#include "grwm/trajectories/planner.h"

namespace grwm::trajectories {
namespace {

using mazeworld::Action;
using mazeworld::Cell;
using mazeworld::Dir4;
using mazeworld::Pose;

// Within this distance of a cell center the agent counts as centered.
constexpr double kCenterTolerance = 0.15;

Cell CellOf(const Pose& p) {
  return {static_cast<int>(std::floor(p.x)), static_cast<int>(std::floor(p.y))};
}

Dir4 NearestDir4(uint32_t heading) {
  return Dir4(((heading + (1u << 29)) >> 30) & 3u);
}

// Steers toward `target` with the turn granularity of the environment: turn
// when the heading error is at least half an increment, else step forward.
// An exact half-revolution error turns left.
Action SteerToward(const Pose& pose, double tx, double ty, uint32_t turn_units) {
  const double want = std::atan2(ty - pose.y, tx - pose.x);
  const uint32_t desired_raw = mazeworld::HeadingFromRadians(want);
  // Quantize to the nearest multiple of the turn increment.
  const uint64_t k = (uint64_t(desired_raw) + turn_units / 2) / turn_units;
  const uint32_t desired = static_cast<uint32_t>(k * turn_units);
  const int32_t diff = static_cast<int32_t>(desired - pose.heading);
  const uint64_t mag = diff == INT32_MIN
                           ? (uint64_t{1} << 31)
                           : static_cast<uint64_t>(std::abs(diff));
  if (mag * 2 < turn_units) return Action::kForward;
  if (diff == INT32_MIN) return Action::kTurnLeft;
  return diff > 0 ? Action::kTurnLeft : Action::kTurnRight;
}

}  // namespace

uint64_t PolicySeed(uint64_t seed, int index) {
  numcore::RandomStream s(seed, "trajectories/policy-seed", index);
  return s.NextU64();
}

Trajectory CollectTrajectory(const mazeworld::MazeMap& map,
                             const mazeworld::EnvConfig& cfg,
                             uint64_t map_seed, uint64_t policy_seed,
                             int length, double epsilon) {
  GRWM_REQUIRE(length >= 1, "trajectory length must be >= 1");
  GRWM_REQUIRE(epsilon >= 0.0 && epsilon <= 1.0, "epsilon in [0, 1]");
  numcore::RandomStream rng(policy_seed, "trajectories/policy");
  const uint32_t turn_units = cfg.turn_units();

  auto sample_cell = [&]() {
    return map.CellAt(static_cast<int>(rng.UniformInt(map.num_cells())));
  };
  const Cell start = sample_cell();
  Pose pose{start.x + 0.5, start.y + 0.5,
            static_cast<uint32_t>(rng.UniformInt(4)) << 30};
  Cell goal = sample_cell();

  Trajectory traj;
  traj.map_seed = map_seed;
  traj.policy_seed = policy_seed;
  traj.actions.reserve(length);
  traj.frames.reserve(length);
  traj.poses.reserve(length);
  // The agent travels between cell centers: `from` is the cell it last
  // departed and `to` the cell whose center it is heading for.
  Cell from = start, to = start;
  for (int t = 0; t < length; ++t) {
    const Cell cell = CellOf(pose);
    const bool centered = std::hypot(pose.x - (cell.x + 0.5),
                                     pose.y - (cell.y + 0.5)) <
                          kCenterTolerance;
    if (centered) {
      if (cell == goal && map.num_cells() > 1) {
        do {
          goal = sample_cell();
        } while (goal == cell);
      }
      Dir4 d = NearestDir4(pose.heading);
      for (Action a : PlanAStar(map, cell, d, goal)) {
        if (a == Action::kForward) break;
        d = a == Action::kTurnLeft ? mazeworld::TurnLeft(d)
                                   : mazeworld::TurnRight(d);
      }
      from = cell;
      to = {cell.x + mazeworld::DirDx(d), cell.y + mazeworld::DirDy(d)};
    } else if (!(cell == from) && !(cell == to)) {
      // Knocked off course by noise: recover to the current cell's center.
      from = to = cell;
    }
    Action action = SteerToward(pose, to.x + 0.5, to.y + 0.5, turn_units);
    // Draws happen every step so the noise sequence does not depend on the
    // planner's choices.
    const bool noisy = rng.Uniform() < epsilon;
    const Action random_action =
        static_cast<Action>(rng.UniformInt(mazeworld::kNumActions));
    if (noisy) action = random_action;

    traj.poses.push_back(pose);
    traj.frames.push_back(mazeworld::Render(map, pose, cfg));
    traj.actions.push_back(action);
    pose = mazeworld::Step(map, pose, action, cfg);
  }
  return traj;
}

Dataset CollectDataset(const MazeSpec& maze, const mazeworld::EnvConfig& cfg,
                       const CollectConfig& collect) {
  cfg.Validate();
  GRWM_REQUIRE(collect.count >= 1, "need at least one trajectory");
  const mazeworld::MazeMap map = maze.Build(static_cast<int>(cfg.palette.size()));
  Dataset ds;
  ds.header.count = collect.count;
  ds.header.length = collect.length;
  ds.header.height = cfg.frame_height;
  ds.header.width = cfg.frame_width;
  ds.header.channels = 3;
  ds.header.env_digest = cfg.Digest();
  ds.header.maze = maze;
  ds.trajectories.resize(collect.count);
  auto work = [&](int begin, int stride) {
    for (int i = begin; i < collect.count; i += stride) {
      ds.trajectories[i] =
          CollectTrajectory(map, cfg, maze.seed, PolicySeed(collect.seed, i),
                            collect.length, collect.epsilon);
    }
  };
  const int workers = std::max(1, collect.workers);
  if (workers == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
    for (std::thread& th : pool) th.join();
  }
  return ds;
}

std::pair<std::vector<int>, std::vector<int>> Split(int count, double fraction,
                                                    uint64_t seed) {
  GRWM_REQUIRE(fraction > 0.0 && fraction < 1.0, "fraction in (0, 1)");
  GRWM_REQUIRE(count >= 2, "need at least two trajectories to split");
  std::vector<int> idx(count);
  for (int i = 0; i < count; ++i) idx[i] = i;
  numcore::RandomStream rng(seed, "trajectories/split");
  for (int i = count - 1; i > 0; --i) {
    std::swap(idx[i], idx[rng.UniformInt(uint64_t(i) + 1)]);
  }
  int n_train = static_cast<int>(std::lround(fraction * count));
  n_train = std::clamp(n_train, 1, count - 1);
  std::vector<int> train(idx.begin(), idx.begin() + n_train);
  std::vector<int> val(idx.begin() + n_train, idx.end());
  std::sort(train.begin(), train.end());
  std::sort(val.begin(), val.end());
  return {train, val};
}

int FirstReplayMismatch(const Dataset& ds, const mazeworld::MazeMap& map,
                        const mazeworld::EnvConfig& cfg) {
  for (size_t i = 0; i < ds.trajectories.size(); ++i) {
    const Trajectory& tr = ds.trajectories[i];
    if (tr.length() == 0) continue;
    Pose pose = tr.poses[0];
    for (int t = 0; t < tr.length(); ++t) {
      if (!(pose == tr.poses[t])) return static_cast<int>(i);
      if (!(mazeworld::Render(map, pose, cfg) == tr.frames[t])) {
        return static_cast<int>(i);
      }
      pose = mazeworld::Step(map, pose, tr.actions[t], cfg);
    }
  }
  return -1;
}

CoverageReport Coverage(const Dataset& ds, const mazeworld::MazeMap& map) {
  CoverageReport r;
  r.cells_total = map.num_cells();
  r.visits_per_cell.assign(map.num_cells(), 0);
  for (const Trajectory& tr : ds.trajectories) {
    for (int t = 0; t < tr.length(); ++t) {
      const Cell c = CellOf(tr.poses[t]);
      if (map.InBounds(c)) ++r.visits_per_cell[map.CellIndex(c)];
      ++r.action_counts[static_cast<int>(tr.actions[t])];
    }
  }
  for (int v : r.visits_per_cell) r.cells_visited += v > 0;
  return r;
}

}  // namespace grwm::trajectories
