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

#include "grwm/repmodel/trainer.h"

#include <algorithm>

#include "grwm/common/errors.h"
#include "grwm/numcore/optim.h"

namespace grwm::repmodel {
namespace {

// Stacks segments [len] frames starting at `starts` into [B, L, H, W, 3].
Tensor<float> StackSegments(const trajectories::Dataset& ds,
                            const std::vector<int>& trajs,
                            const std::vector<int>& starts, int len) {
  const int h = ds.header.height, w = ds.header.width;
  const int64_t per = int64_t(len) * h * w * 3;
  Tensor<float> out({int64_t(trajs.size()), len, h, w, 3});
  for (size_t i = 0; i < trajs.size(); ++i) {
    Tensor<float> seg =
        FramesToTensor(ds.trajectories[trajs[i]].frames, starts[i], len);
    std::copy(seg.data(), seg.data() + per, out.data() + i * per);
  }
  return out;
}

}  // namespace

std::vector<AeLogRow> TrainAutoencoder(
    RepModel<float>& model, const trajectories::Dataset& ds,
    const std::vector<int>& train, const geomloss::LossConfig& loss,
    const AeTrainConfig& cfg,
    const std::function<void(const AeLogRow&)>& on_step) {
  loss.Validate();
  const RepConfig& rc = model.config();
  GRWM_REQUIRE(int(ds.header.height) == rc.frame_height &&
                   int(ds.header.width) == rc.frame_width,
               "dataset frame size does not match the model");
  GRWM_REQUIRE(rc.projection == loss.projection,
               "model and loss disagree on the projection mode");
  GRWM_REQUIRE(cfg.steps >= 1 && cfg.batch >= 2 && cfg.segment >= 2,
               "need steps >= 1, batch >= 2, segment >= 2");
  GRWM_REQUIRE(int(train.size()) >= cfg.batch,
               "fewer training trajectories than the batch size");
  GRWM_REQUIRE(int(ds.header.length) >= cfg.segment,
               "segment longer than the trajectories");

  numcore::Adam<float> adam({0.9, 0.999, 1e-8, cfg.weight_decay});
  const numcore::LRSchedule schedule(
      cfg.lr, std::min(cfg.warmup, cfg.steps), cfg.steps, cfg.min_ratio);
  std::vector<AeLogRow> log;
  log.reserve(cfg.steps);
  std::vector<std::vector<float>> snapshot;
  std::vector<int> pool = train;

  for (int step = 1; step <= cfg.steps; ++step) {
    numcore::RandomStream rng(cfg.seed, "repmodel/batch", step);
    // Partial Fisher-Yates: the first `batch` entries are distinct draws.
    for (int i = 0; i < cfg.batch; ++i) {
      std::swap(pool[i], pool[i + rng.UniformInt(pool.size() - i)]);
    }
    std::vector<int> trajs(pool.begin(), pool.begin() + cfg.batch);
    std::vector<int> starts(cfg.batch);
    for (int& s : starts) {
      s = int(rng.UniformInt(ds.header.length - cfg.segment + 1));
    }
    Tensor<float> frames = StackSegments(ds, trajs, starts, cfg.segment);

    snapshot.clear();
    for (const auto& p : model.params().all()) {
      snapshot.emplace_back(p.value.values().begin(), p.value.values().end());
    }
    try {
      numcore::Tape<float> tape;
      numcore::RandomStream noise(cfg.seed, "repmodel/noise", step);
      Var<float> x = tape.Constant(std::move(frames));
      auto out = model.Forward(tape, x, &noise);
      AeLogRow row;
      row.step = step;
      row.lr = schedule.Rate(step);
      Var<float> total = geomloss::TotalLoss(
          out.recon, x, out.latents.mu, out.latents.logvar, out.embeddings,
          loss, &row.report);
      model.params().ZeroGrad();
      tape.Backward(total);
      for (const auto& p : model.params().all()) {
        if (!p.grad.AllFinite()) {
          throw NumericFailure("backward",
                               "non-finite gradient for " + p.name);
        }
      }
      adam.Step(model.params(), row.lr);
      log.push_back(row);
      if (on_step) on_step(row);
    } catch (const NumericFailure&) {
      size_t i = 0;
      for (auto& p : model.params().all()) {
        std::copy(snapshot[i].begin(), snapshot[i].end(), p.value.data());
        ++i;
      }
      throw;
    }
  }
  return log;
}

Tensor<float> EncodeTrajectory(const RepModel<float>& model,
                               const trajectories::Trajectory& traj) {
  Tensor<float> frames = FramesToTensor(traj.frames, 0, traj.length());
  Shape s = frames.shape();
  s.insert(s.begin(), 1);
  Tensor<float> mu = model.EncodeMeans(std::move(frames).Reshape(s));
  return std::move(mu).Reshape({traj.length(), model.config().latent_dim});
}

geomloss::LossReport EvaluateLosses(const RepModel<float>& model,
                                    const trajectories::Dataset& ds,
                                    const std::vector<int>& trajectories,
                                    int segment,
                                    const geomloss::LossConfig& loss) {
  GRWM_REQUIRE(trajectories.size() >= 2, "need at least two trajectories");
  std::vector<int> starts(trajectories.size(), 0);
  Tensor<float> frames = StackSegments(ds, trajectories, starts, segment);
  numcore::Tape<float> tape;
  Var<float> x = tape.Constant(std::move(frames));
  auto out = model.Forward(tape, x, nullptr);
  geomloss::LossReport r;
  geomloss::TotalLoss(out.recon, x, out.latents.mu, out.latents.logvar,
                      out.embeddings, loss, &r);
  return r;
}

}  // namespace grwm::repmodel
