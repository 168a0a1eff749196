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

#ifndef GRWM_LATDYN_ROLLOUT_H_
#define GRWM_LATDYN_ROLLOUT_H_

#include <vector>

#include "grwm/latdyn/dynamics.h"
#include "grwm/repmodel/rep_model.h"
#include "grwm/trajectories/dataset.h"

namespace grwm::latdyn {

// Autoregressive generation from observed frames o_0..o_t and actions
// a_t..a_{t+H-1}. Returns H predicted frames for o_{t+1}..o_{t+H}. With
// horizon 0 the result is instead the decoder's reconstruction of the last m
// context frames. Diffusion noise comes from `seed`; other backends ignore it.
std::vector<mazeworld::Frame> RolloutLatent(
    const repmodel::RepModel<float>& rep, const DynModel& dyn,
    const std::vector<mazeworld::Frame>& context,
    const std::vector<mazeworld::Action>& actions, int horizon,
    uint64_t seed);

// Same protocol on oracle states; each predicted state is mapped back to a
// pose (clamped into the map) and drawn by the environment renderer. With
// horizon 0 the last m context poses are rendered.
std::vector<mazeworld::Frame> RolloutOracle(
    const DynModel& dyn, const mazeworld::MazeMap& map,
    const mazeworld::EnvConfig& env,
    const std::vector<mazeworld::Pose>& context,
    const std::vector<mazeworld::Action>& actions, int horizon);

// Evaluation episode cut from a recorded trajectory: context is
// frames[0..start], ground truth is frames[start+1..start+horizon].
struct Episode {
  int trajectory = 0;
  int start = 0;
};

std::vector<mazeworld::Frame> RolloutEpisode(
    const repmodel::RepModel<float>& rep, const DynModel& dyn,
    const trajectories::Trajectory& traj, int start, int horizon,
    uint64_t seed);
std::vector<mazeworld::Frame> RolloutOracleEpisode(
    const DynModel& dyn, const mazeworld::MazeMap& map,
    const mazeworld::EnvConfig& env, const trajectories::Trajectory& traj,
    int start, int horizon);

}  // namespace grwm::latdyn

#endif  // GRWM_LATDYN_ROLLOUT_H_
