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

#ifndef GRWM_LATDYN_DYNAMICS_H_
#define GRWM_LATDYN_DYNAMICS_H_

#include <functional>
#include <string>
#include <vector>

#include "grwm/latdyn/diffusion.h"
#include "grwm/mazeworld/env.h"
#include "grwm/numcore/params.h"

namespace grwm::latdyn {

enum class Backend { kRegressor, kDiffusion, kOracle };
const char* BackendName(Backend b);
Backend ParseBackend(const std::string& name);

struct DynConfig {
  Backend backend = Backend::kRegressor;
  // Number of past latents m the prediction is conditioned on.
  int context = 4;
  int width = 256;
  int blocks = 3;
  int diffusion_steps = 1000;
  double shift = 10.0;
  double noise_clip = 20.0;
  double snr_gamma = 20.0;
  // EMA smoothing of the per-level loss weights along t; 0 disables.
  double weight_decay_ema = 0.0;
  int sampler_steps = 5;
  double eta = 0.0;
  int time_embed = 16;

  void Validate() const;
  std::string ToJson() const;
  static DynConfig FromJson(const std::string& text);
  bool operator==(const DynConfig&) const = default;
};

enum class SequenceKind { kLatent, kOracleState };

// One trajectory in the space the dynamics operates on: states[t] is the
// latent (or oracle state) at t and actions[t] leads from t to t+1.
struct Sequence {
  SequenceKind kind = SequenceKind::kLatent;
  Tensor<float> states;  // [T, d]
  std::vector<mazeworld::Action> actions;
};

struct DynTrainConfig {
  int steps = 3000;
  int batch = 256;
  double lr = 1e-3;
  int warmup = 100;
  double min_ratio = 0.1;
  double weight_decay = 1e-4;
  uint64_t seed = 1;
};

// Action-conditioned next-state model. Inputs and targets are standardized
// with statistics of the training sequences; the network predicts the
// standardized change from the last context state (the regressor and oracle
// backends directly, the diffusion backend as a v-prediction over it).
class DynModel {
 public:
  DynModel(const DynConfig& cfg, int state_dim, uint64_t seed);
  DynModel(const DynModel&) = delete;
  DynModel& operator=(const DynModel&) = delete;

  const DynConfig& config() const { return cfg_; }
  int state_dim() const { return state_dim_; }
  numcore::ParamSet<float>& params() { return params_; }
  const DiffusionSchedule& schedule() const { return schedule_; }
  // Loss weight per noise level, indexed 0..T_d.
  const std::vector<double>& level_weights() const { return level_weights_; }
  void set_level_weights(std::vector<double> w);
  // Sampler settings only affect Predict, so they may change after training.
  void set_sampler(int steps, double eta);

  // Per-dimension mean/std of states and of one-step changes.
  void FitStatistics(const std::vector<Sequence>& train);

  // One optimizer-free evaluation of the training objective on a batch;
  // accumulates gradients into params(). Returns the loss value.
  double Loss(const std::vector<Sequence>& data,
              const std::vector<std::pair<int, int>>& samples,
              numcore::RandomStream& rng);

  // context [N, m, d] raw states, actions [N] -> next states [N, d]. The
  // diffusion backend draws its initial noise from `rng`.
  Tensor<float> Predict(const Tensor<float>& context,
                        const std::vector<mazeworld::Action>& actions,
                        numcore::RandomStream* rng) const;

  std::vector<numcore::NamedArray> Export() const;
  void Import(const std::vector<numcore::NamedArray>& arrays);

 private:
  numcore::Var<float> Network(numcore::Tape<float>& tape,
                              numcore::Var<float> input) const;
  // Standardized, flattened context plus one-hot actions: [N, m*d + 3].
  Tensor<float> Conditioning(const float* context, int n,
                             const std::vector<mazeworld::Action>& actions)
      const;
  Tensor<float> TimeEmbedding(const std::vector<int>& t) const;

  DynConfig cfg_;
  int state_dim_;
  DiffusionSchedule schedule_;
  std::vector<double> level_weights_;
  numcore::ParamSet<float> params_;
  // Not optimized; exported alongside the weights.
  numcore::ParamSet<float> stats_;
  numcore::Parameter<float>* state_mean_;
  numcore::Parameter<float>* state_std_;
  numcore::Parameter<float>* delta_mean_;
  numcore::Parameter<float>* delta_std_;
  numcore::Linear<float> in_;
  std::vector<numcore::LayerNormParams<float>> norms_;
  std::vector<numcore::Linear<float>> fc1_, fc2_;
  numcore::LayerNormParams<float> out_norm_;
  numcore::Linear<float> out_;
};

// All valid (trajectory, t) sample positions: t - m + 1 >= 0 and t + 1 < T.
std::vector<std::pair<int, int>> SamplePositions(
    const std::vector<Sequence>& data, int context);

// Adam training on uniformly drawn sample positions. Returns the loss per
// step.
std::vector<double> TrainDynamics(
    DynModel& model, const std::vector<Sequence>& train,
    const DynTrainConfig& cfg,
    const std::function<void(int64_t step, double lr, double loss)>& on_step =
        {});

// Oracle sequence of a trajectory: OracleState of every pose.
Sequence OracleSequence(const std::vector<mazeworld::Pose>& poses,
                        const std::vector<mazeworld::Action>& actions,
                        const mazeworld::MazeMap& map);

}  // namespace grwm::latdyn

#endif  // GRWM_LATDYN_DYNAMICS_H_
