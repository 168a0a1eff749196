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

#ifndef GRWM_CLI_PIPELINE_H_
#define GRWM_CLI_PIPELINE_H_

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "grwm/cli/config.h"
#include "grwm/evalkit/cluster.h"
#include "grwm/latdyn/dynamics.h"
#include "grwm/latdyn/rollout.h"
#include "grwm/numcore/params.h"
#include "grwm/repmodel/trainer.h"

namespace grwm::cli {

// A dataset with its maze and train/held-out split.
struct DataBundle {
  trajectories::Dataset ds;
  mazeworld::MazeMap map;
  std::vector<int> train;
  std::vector<int> val;
};

trajectories::Dataset GenerateData(const RunConfig& cfg);
// Attaches the maze and split. Throws FormatError(kConfigMismatch) when the
// dataset was collected under a different environment or maze.
DataBundle BundleData(const RunConfig& cfg, trajectories::Dataset ds);
DataBundle LoadData(const RunConfig& cfg, const std::string& path);

// Checkpoints carry their own configuration as byte arrays under "meta/", so
// a model can be rebuilt from the file alone.
std::vector<numcore::NamedArray> RepCheckpoint(
    const repmodel::RepModel<float>& model);
std::unique_ptr<repmodel::RepModel<float>> RepFromCheckpoint(
    const std::vector<numcore::NamedArray>& arrays);
// `rep_digest` identifies the representation the dynamics was trained on
// (0 for the oracle backend).
std::vector<numcore::NamedArray> DynCheckpoint(const latdyn::DynModel& model,
                                               uint64_t rep_digest);
struct LoadedDyn {
  std::unique_ptr<latdyn::DynModel> model;
  uint64_t rep_digest = 0;
};
LoadedDyn DynFromCheckpoint(const std::vector<numcore::NamedArray>& arrays);

std::unique_ptr<repmodel::RepModel<float>> TrainRepresentation(
    const RunConfig& cfg, const DataBundle& data,
    const std::function<void(const repmodel::AeLogRow&)>& on_step = {});

std::vector<latdyn::Sequence> LatentSequences(
    const repmodel::RepModel<float>& rep, const trajectories::Dataset& ds,
    const std::vector<int>& indices);
std::vector<latdyn::Sequence> OracleSequences(const DataBundle& data,
                                              const std::vector<int>& indices);

// Trains the configured backend on the training split; `rep` is ignored by
// the oracle backend and required otherwise.
std::unique_ptr<latdyn::DynModel> TrainDynamicsModel(
    const RunConfig& cfg, const DataBundle& data,
    const repmodel::RepModel<float>* rep,
    const std::function<void(int64_t, double, double)>& on_step = {});

// Held-out evaluation episodes: the first `eval.episodes` validation
// trajectories, each cut at `eval.start`.
std::vector<latdyn::Episode> EvalEpisodes(const RunConfig& cfg,
                                          const DataBundle& data);

// Predicted and true frames of one episode.
using EpisodeSink = std::function<void(
    int episode, const std::vector<mazeworld::Frame>& pred,
    const std::vector<mazeworld::Frame>& truth)>;

// Frame-wise MSE curve over the evaluation episodes. `rep` is ignored for
// the oracle backend.
evalkit::MetricCurve RolloutCurve(const RunConfig& cfg, const DataBundle& data,
                                  const repmodel::RepModel<float>* rep,
                                  const latdyn::DynModel& dyn,
                                  const EpisodeSink& sink = {});

// Probe from evaluation-mode latent means to oracle states: fitted on the
// training split, scored on the held-out split.
evalkit::ProbeReport ProbeRepresentation(const RunConfig& cfg,
                                         const DataBundle& data,
                                         const repmodel::RepModel<float>& rep);

struct ClusterOutput {
  evalkit::ClusterReport report;
  std::vector<std::array<double, 2>> positions;
};
// k-means over the latent means of every held-out frame.
ClusterOutput ClusterRepresentation(const RunConfig& cfg,
                                    const DataBundle& data,
                                    const repmodel::RepModel<float>& rep);

// Monitored loss terms on held-out segments.
geomloss::LossReport Diagnose(const RunConfig& cfg, const DataBundle& data,
                              const repmodel::RepModel<float>& rep);

}  // namespace grwm::cli

#endif  // GRWM_CLI_PIPELINE_H_
