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

#ifndef GRWM_REPMODEL_TRAINER_H_
#define GRWM_REPMODEL_TRAINER_H_

#include <functional>
#include <vector>

#include "grwm/geomloss/losses.h"
#include "grwm/repmodel/rep_model.h"
#include "grwm/trajectories/dataset.h"

namespace grwm::repmodel {

struct AeTrainConfig {
  int steps = 2000;
  // Segments per batch, each from a distinct trajectory.
  int batch = 8;
  int segment = 16;
  double lr = 5e-4;
  int warmup = 100;
  double min_ratio = 0.1;
  double weight_decay = 1e-4;
  uint64_t seed = 1;
};

struct AeLogRow {
  int64_t step = 0;
  double lr = 0.0;
  geomloss::LossReport report;
};

// Optimizes `model` on segments drawn from `train` (trajectory indices).
// On a numeric failure the parameters are restored to their values before
// the failing step and the exception propagates. `on_step` sees every row.
std::vector<AeLogRow> TrainAutoencoder(
    RepModel<float>& model, const trajectories::Dataset& ds,
    const std::vector<int>& train, const geomloss::LossConfig& loss,
    const AeTrainConfig& cfg,
    const std::function<void(const AeLogRow&)>& on_step = {});

// Evaluation-mode latent means of a whole trajectory, [T, d].
Tensor<float> EncodeTrajectory(const RepModel<float>& model,
                               const trajectories::Trajectory& traj);

// Monitored loss terms on fixed evaluation segments (no sampling noise, no
// gradient). Segments start at t=0 of each listed trajectory.
geomloss::LossReport EvaluateLosses(const RepModel<float>& model,
                                    const trajectories::Dataset& ds,
                                    const std::vector<int>& trajectories,
                                    int segment,
                                    const geomloss::LossConfig& loss);

}  // namespace grwm::repmodel

#endif  // GRWM_REPMODEL_TRAINER_H_
