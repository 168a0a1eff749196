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

#include "grwm/trajectories/planner.h"

#include <algorithm>
#include <cstdlib>
#include <queue>
#include <tuple>

#include "grwm/common/errors.h"

namespace grwm::trajectories {

using mazeworld::Action;
using mazeworld::Cell;
using mazeworld::Dir4;

std::vector<Action> PlanAStar(const mazeworld::MazeMap& map, Cell start,
                              Dir4 heading, Cell goal) {
  GRWM_REQUIRE(map.InBounds(start) && map.InBounds(goal),
               "start and goal must be cells of the map");
  if (start == goal) return {};
  const int n = map.num_cells() * 4;
  auto id = [&map](Cell c, Dir4 d) { return map.CellIndex(c) * 4 + int(d); };
  auto heuristic = [&goal](Cell c) {
    return std::abs(c.x - goal.x) + std::abs(c.y - goal.y);
  };
  std::vector<int> g(n, -1);
  std::vector<int> parent(n, -1);
  std::vector<Action> via(n, Action::kForward);
  std::vector<uint8_t> closed(n, 0);
  // (f, sequence, state)
  using Entry = std::tuple<int, int64_t, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> open;
  int64_t seq = 0;
  const int s0 = id(start, heading);
  g[s0] = 0;
  open.emplace(heuristic(start), seq++, s0);
  int found = -1;
  while (!open.empty()) {
    const auto [f, order, s] = open.top();
    open.pop();
    if (closed[s]) continue;
    closed[s] = 1;
    const Cell c = map.CellAt(s / 4);
    const Dir4 d = Dir4(s % 4);
    if (c == goal) {
      found = s;
      break;
    }
    for (Action a : {Action::kForward, Action::kTurnLeft, Action::kTurnRight}) {
      Cell nc = c;
      Dir4 nd = d;
      if (a == Action::kForward) {
        if (!map.Passable(c, d)) continue;
        nc = {c.x + mazeworld::DirDx(d), c.y + mazeworld::DirDy(d)};
      } else {
        nd = a == Action::kTurnLeft ? mazeworld::TurnLeft(d)
                                    : mazeworld::TurnRight(d);
      }
      const int ns = id(nc, nd);
      const int ng = g[s] + 1;
      if (closed[ns] || (g[ns] >= 0 && g[ns] <= ng)) continue;
      g[ns] = ng;
      parent[ns] = s;
      via[ns] = a;
      open.emplace(ng + heuristic(nc), seq++, ns);
    }
  }
  GRWM_REQUIRE(found >= 0, "goal unreachable from start");
  std::vector<Action> plan;
  for (int s = found; s != s0; s = parent[s]) plan.push_back(via[s]);
  std::reverse(plan.begin(), plan.end());
  return plan;
}

std::vector<Action> ExpandPlan(const std::vector<Action>& plan,
                               int turns_per_quarter, int steps_per_cell) {
  std::vector<Action> out;
  for (Action a : plan) {
    const int reps = a == Action::kForward ? steps_per_cell : turns_per_quarter;
    out.insert(out.end(), reps, a);
  }
  return out;
}

}  // namespace grwm::trajectories
