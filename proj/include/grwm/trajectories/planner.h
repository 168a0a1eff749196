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

#ifndef GRWM_TRAJECTORIES_PLANNER_H_
#define GRWM_TRAJECTORIES_PLANNER_H_

#include <vector>

#include "grwm/mazeworld/env.h"
#include "grwm/mazeworld/maze.h"

namespace grwm::trajectories {

// A* over (cell, quarter-turn heading) states. FORWARD moves one cell, turns
// rotate by 90 degrees, every action costs 1. Successors are expanded in the
// order FORWARD, TURN_LEFT, TURN_RIGHT and equal-priority entries pop in
// insertion order, so the returned plan is deterministic.
// Throws ContractViolation when the goal is unreachable.
std::vector<mazeworld::Action> PlanAStar(const mazeworld::MazeMap& map,
                                         mazeworld::Cell start,
                                         mazeworld::Dir4 heading,
                                         mazeworld::Cell goal);

// Replaces each planner action by the fine-grained actions that realize it:
// a quarter turn becomes `turns_per_quarter` turns and a cell move becomes
// `steps_per_cell` forward steps.
std::vector<mazeworld::Action> ExpandPlan(
    const std::vector<mazeworld::Action>& plan, int turns_per_quarter,
    int steps_per_cell);

}  // namespace grwm::trajectories

#endif  // GRWM_TRAJECTORIES_PLANNER_H_
