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

#include "grwm/latdyn/rollout.h"

#include <algorithm>
#include <deque>

#include "grwm/common/errors.h"

namespace grwm::latdyn {
namespace {

using mazeworld::Action;
using mazeworld::Frame;

void CheckRequest(const DynModel& dyn, size_t context, size_t actions,
                  int horizon) {
  GRWM_REQUIRE(horizon >= 0, "horizon must be >= 1 (0 for context only)");
  GRWM_REQUIRE(context >= size_t(dyn.config().context),
               "need at least " + std::to_string(dyn.config().context) +
                   " context frames");
  GRWM_REQUIRE(actions >= size_t(horizon), "one action per predicted step");
}

// Autoregressive loop over a sliding window of m states.
std::vector<Tensor<float>> Unroll(const DynModel& dyn,
                                  std::deque<Tensor<float>> window,
                                  const std::vector<Action>& actions,
                                  int horizon, numcore::RandomStream* rng) {
  const int m = dyn.config().context, d = dyn.state_dim();
  std::vector<Tensor<float>> out;
  out.reserve(horizon);
  for (int h = 0; h < horizon; ++h) {
    Tensor<float> ctx({1, m, d});
    for (int j = 0; j < m; ++j) {
      std::copy(window[j].values().begin(), window[j].values().end(),
                ctx.data() + j * d);
    }
    Tensor<float> next = dyn.Predict(ctx, {actions[h]}, rng);
    next = std::move(next).Reshape({d});
    window.pop_front();
    window.push_back(next);
    out.push_back(std::move(next));
  }
  return out;
}

Frame RenderState(const Tensor<float>& s, const mazeworld::MazeMap& map,
                  const mazeworld::EnvConfig& env) {
  std::array<double, 4> st{s[0], s[1], s[2], s[3]};
  mazeworld::Pose p = mazeworld::PoseFromOracleState(st, map);
  constexpr double kInset = 1e-6;
  p.x = std::clamp(p.x, kInset, map.width() - kInset);
  p.y = std::clamp(p.y, kInset, map.height() - kInset);
  return mazeworld::Render(map, p, env);
}

}  // namespace

std::vector<Frame> RolloutLatent(const repmodel::RepModel<float>& rep,
                                 const DynModel& dyn,
                                 const std::vector<Frame>& context,
                                 const std::vector<Action>& actions,
                                 int horizon, uint64_t seed) {
  GRWM_REQUIRE(dyn.config().backend != Backend::kOracle,
               "oracle dynamics roll out through RolloutOracle");
  CheckRequest(dyn, context.size(), actions.size(), horizon);
  const int m = dyn.config().context, d = dyn.state_dim();
  GRWM_REQUIRE(rep.config().latent_dim == d,
               "dynamics state width differs from the latent width");
  const int n = static_cast<int>(context.size());
  Tensor<float> frames = repmodel::FramesToTensor(context, 0, n);
  numcore::Shape s = frames.shape();
  s.insert(s.begin(), 1);
  const Tensor<float> mu = rep.EncodeMeans(std::move(frames).Reshape(s));

  std::deque<Tensor<float>> window;
  for (int t = n - m; t < n; ++t) {
    window.emplace_back(numcore::Shape{d},
                        std::vector<float>(mu.data() + int64_t(t) * d,
                                           mu.data() + int64_t(t + 1) * d));
  }
  std::vector<Tensor<float>> latents;
  if (horizon == 0) {
    latents.assign(window.begin(), window.end());
  } else {
    numcore::RandomStream rng(seed, "latdyn/rollout");
    latents = Unroll(dyn, std::move(window), actions, horizon, &rng);
  }
  const int count = static_cast<int>(latents.size());
  Tensor<float> z({count, d});
  for (int i = 0; i < count; ++i) {
    std::copy(latents[i].values().begin(), latents[i].values().end(),
              z.data() + int64_t(i) * d);
  }
  const Tensor<float> img = rep.DecodeLatents(z);
  const int hh = rep.config().frame_height, ww = rep.config().frame_width;
  std::vector<Frame> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    out.push_back(repmodel::TensorToFrame(
        img.data() + int64_t(i) * hh * ww * 3, hh, ww));
  }
  return out;
}

std::vector<Frame> RolloutOracle(const DynModel& dyn,
                                 const mazeworld::MazeMap& map,
                                 const mazeworld::EnvConfig& env,
                                 const std::vector<mazeworld::Pose>& context,
                                 const std::vector<Action>& actions,
                                 int horizon) {
  GRWM_REQUIRE(dyn.config().backend == Backend::kOracle,
               "RolloutOracle needs the oracle backend");
  GRWM_REQUIRE(dyn.state_dim() == 4, "oracle states are 4-dimensional");
  CheckRequest(dyn, context.size(), actions.size(), horizon);
  const int m = dyn.config().context;
  std::deque<Tensor<float>> window;
  for (size_t t = context.size() - m; t < context.size(); ++t) {
    const auto st = mazeworld::OracleState(context[t], map);
    window.emplace_back(numcore::Shape{4},
                        std::vector<float>(st.begin(), st.end()));
  }
  std::vector<Tensor<float>> states;
  if (horizon == 0) {
    states.assign(window.begin(), window.end());
  } else {
    states = Unroll(dyn, std::move(window), actions, horizon, nullptr);
  }
  std::vector<Frame> out;
  out.reserve(states.size());
  for (const Tensor<float>& s : states) out.push_back(RenderState(s, map, env));
  return out;
}

std::vector<Frame> RolloutEpisode(const repmodel::RepModel<float>& rep,
                                  const DynModel& dyn,
                                  const trajectories::Trajectory& traj,
                                  int start, int horizon, uint64_t seed) {
  GRWM_REQUIRE(start >= 0 && start + horizon < traj.length(),
               "episode runs past the end of the trajectory");
  const std::vector<Frame> ctx(traj.frames.begin(),
                               traj.frames.begin() + start + 1);
  const std::vector<Action> acts(traj.actions.begin() + start,
                                 traj.actions.begin() + start + horizon);
  return RolloutLatent(rep, dyn, ctx, acts, horizon, seed);
}

std::vector<Frame> RolloutOracleEpisode(const DynModel& dyn,
                                        const mazeworld::MazeMap& map,
                                        const mazeworld::EnvConfig& env,
                                        const trajectories::Trajectory& traj,
                                        int start, int horizon) {
  GRWM_REQUIRE(start >= 0 && start + horizon < traj.length(),
               "episode runs past the end of the trajectory");
  const std::vector<mazeworld::Pose> ctx(traj.poses.begin(),
                                         traj.poses.begin() + start + 1);
  const std::vector<Action> acts(traj.actions.begin() + start,
                                 traj.actions.begin() + start + horizon);
  return RolloutOracle(dyn, map, env, ctx, acts, horizon);
}

}  // namespace grwm::latdyn
