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

#include "grwm/cli/pipeline.h"

#include <algorithm>
#include <atomic>
#include <thread>

#include "grwm/common/errors.h"
#include "grwm/evalkit/metrics.h"
#include "grwm/evalkit/probe.h"

namespace grwm::cli {
namespace {

using numcore::NamedArray;
using numcore::Shape;
using numcore::Tensor;

NamedArray BytesArray(const std::string& name, const std::string& bytes) {
  NamedArray a{name, Shape{static_cast<int64_t>(bytes.size())}, {}};
  for (unsigned char c : bytes) a.values.push_back(static_cast<float>(c));
  return a;
}

NamedArray DigestArray(const std::string& name, uint64_t digest) {
  NamedArray a{name, Shape{8}, {}};
  for (int i = 0; i < 8; ++i) {
    a.values.push_back(static_cast<float>((digest >> (8 * i)) & 0xff));
  }
  return a;
}

const NamedArray& FindArray(const std::vector<NamedArray>& arrays,
                            const std::string& name) {
  for (const NamedArray& a : arrays) {
    if (a.name == name) return a;
  }
  throw FormatError(FormatErrorKind::kMalformed,
                    "checkpoint has no array " + name);
}

std::string ArrayBytes(const NamedArray& a) {
  std::string out;
  for (float v : a.values) {
    if (v < 0 || v > 255 || v != static_cast<int>(v)) {
      throw FormatError(FormatErrorKind::kMalformed, "bad byte in " + a.name);
    }
    out.push_back(static_cast<char>(static_cast<int>(v)));
  }
  return out;
}

uint64_t ArrayDigest(const NamedArray& a) {
  const std::string b = ArrayBytes(a);
  if (b.size() != 8) {
    throw FormatError(FormatErrorKind::kMalformed, "bad digest in " + a.name);
  }
  uint64_t d = 0;
  for (int i = 0; i < 8; ++i) {
    d |= static_cast<uint64_t>(static_cast<unsigned char>(b[i])) << (8 * i);
  }
  return d;
}

// Runs fn(i) for i in [0, n); in parallel unless `serial`. Each index writes
// only its own slot, so results do not depend on the schedule.
void ForEach(int n, bool serial, const std::function<void(int)>& fn) {
  const int threads =
      serial ? 1
             : std::max(1, std::min<int>(n, std::thread::hardware_concurrency()));
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int i = next++; i < n; i = next++) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

// Latent means of the listed trajectories stacked as [sum T, d].
Tensor<float> StackLatents(const repmodel::RepModel<float>& rep,
                           const trajectories::Dataset& ds,
                           const std::vector<int>& indices) {
  const int d = rep.config().latent_dim;
  std::vector<float> out;
  for (int i : indices) {
    const Tensor<float> z = repmodel::EncodeTrajectory(rep, ds.trajectories[i]);
    out.insert(out.end(), z.values().begin(), z.values().end());
  }
  return Tensor<float>(Shape{static_cast<int64_t>(out.size() / d), d}, out);
}

Tensor<float> StackOracle(const DataBundle& data,
                          const std::vector<int>& indices) {
  std::vector<float> out;
  for (int i : indices) {
    for (const mazeworld::Pose& p : data.ds.trajectories[i].poses) {
      for (double v : mazeworld::OracleState(p, data.map)) out.push_back(v);
    }
  }
  return Tensor<float>(Shape{static_cast<int64_t>(out.size() / 4), 4}, out);
}

}  // namespace

trajectories::Dataset GenerateData(const RunConfig& cfg) {
  cfg.Validate();
  return trajectories::CollectDataset(cfg.data.maze, cfg.env, cfg.data.collect);
}

DataBundle BundleData(const RunConfig& cfg, trajectories::Dataset ds) {
  if (ds.header.env_digest != cfg.env.Digest()) {
    throw FormatError(FormatErrorKind::kConfigMismatch,
                      "dataset was rendered under a different environment");
  }
  if (!(ds.header.maze == cfg.data.maze)) {
    throw FormatError(FormatErrorKind::kConfigMismatch,
                      "dataset was collected in a different maze");
  }
  DataBundle b;
  b.map = cfg.data.maze.Build(static_cast<int>(cfg.env.palette.size()));
  auto [train, val] = trajectories::Split(static_cast<int>(ds.header.count),
                                          1.0 - cfg.data.val_fraction,
                                          cfg.data.split_seed);
  b.ds = std::move(ds);
  b.train = std::move(train);
  b.val = std::move(val);
  return b;
}

DataBundle LoadData(const RunConfig& cfg, const std::string& path) {
  return BundleData(cfg, trajectories::ReadDataset(path, &cfg.env));
}

std::vector<NamedArray> RepCheckpoint(const repmodel::RepModel<float>& model) {
  std::vector<NamedArray> out = model.params().Export("rep/");
  out.push_back(BytesArray("meta/rep_config", model.config().ToJson()));
  return out;
}

std::unique_ptr<repmodel::RepModel<float>> RepFromCheckpoint(
    const std::vector<NamedArray>& arrays) {
  const repmodel::RepConfig rc = repmodel::RepConfig::FromJson(
      ArrayBytes(FindArray(arrays, "meta/rep_config")));
  auto model = std::make_unique<repmodel::RepModel<float>>(rc, 0);
  model->params().Import(arrays, "rep/");
  return model;
}

std::vector<NamedArray> DynCheckpoint(const latdyn::DynModel& model,
                                      uint64_t rep_digest) {
  std::vector<NamedArray> out = model.Export();
  out.push_back(BytesArray("meta/dyn_config", model.config().ToJson()));
  out.push_back(DigestArray("meta/rep_digest", rep_digest));
  NamedArray dim{"meta/state_dim", Shape{1},
                 {static_cast<float>(model.state_dim())}};
  out.push_back(dim);
  return out;
}

LoadedDyn DynFromCheckpoint(const std::vector<NamedArray>& arrays) {
  const latdyn::DynConfig dc = latdyn::DynConfig::FromJson(
      ArrayBytes(FindArray(arrays, "meta/dyn_config")));
  const NamedArray& dim = FindArray(arrays, "meta/state_dim");
  if (dim.values.size() != 1 || dim.values[0] < 1) {
    throw FormatError(FormatErrorKind::kMalformed, "bad meta/state_dim");
  }
  LoadedDyn out;
  out.model = std::make_unique<latdyn::DynModel>(
      dc, static_cast<int>(dim.values[0]), 0);
  out.model->Import(arrays);
  out.rep_digest = ArrayDigest(FindArray(arrays, "meta/rep_digest"));
  return out;
}

std::unique_ptr<repmodel::RepModel<float>> TrainRepresentation(
    const RunConfig& cfg, const DataBundle& data,
    const std::function<void(const repmodel::AeLogRow&)>& on_step) {
  auto model = std::make_unique<repmodel::RepModel<float>>(cfg.rep, cfg.run.seed);
  repmodel::AeTrainConfig ae = cfg.ae;
  ae.seed = cfg.run.seed;
  repmodel::TrainAutoencoder(*model, data.ds, data.train, cfg.loss, ae,
                             on_step);
  return model;
}

std::vector<latdyn::Sequence> LatentSequences(
    const repmodel::RepModel<float>& rep, const trajectories::Dataset& ds,
    const std::vector<int>& indices) {
  std::vector<latdyn::Sequence> out;
  for (int i : indices) {
    const trajectories::Trajectory& t = ds.trajectories[i];
    out.push_back({latdyn::SequenceKind::kLatent,
                   repmodel::EncodeTrajectory(rep, t), t.actions});
  }
  return out;
}

std::vector<latdyn::Sequence> OracleSequences(const DataBundle& data,
                                              const std::vector<int>& indices) {
  std::vector<latdyn::Sequence> out;
  for (int i : indices) {
    const trajectories::Trajectory& t = data.ds.trajectories[i];
    out.push_back(latdyn::OracleSequence(t.poses, t.actions, data.map));
  }
  return out;
}

std::unique_ptr<latdyn::DynModel> TrainDynamicsModel(
    const RunConfig& cfg, const DataBundle& data,
    const repmodel::RepModel<float>* rep,
    const std::function<void(int64_t, double, double)>& on_step) {
  std::vector<latdyn::Sequence> train;
  int dim = 4;
  if (cfg.dyn.backend == latdyn::Backend::kOracle) {
    train = OracleSequences(data, data.train);
  } else {
    GRWM_REQUIRE(rep != nullptr, "learned dynamics need a representation");
    train = LatentSequences(*rep, data.ds, data.train);
    dim = rep->config().latent_dim;
  }
  auto model = std::make_unique<latdyn::DynModel>(cfg.dyn, dim, cfg.run.seed);
  latdyn::DynTrainConfig tc = cfg.dyn_train;
  tc.seed = cfg.run.seed;
  latdyn::TrainDynamics(*model, train, tc, on_step);
  return model;
}

std::vector<latdyn::Episode> EvalEpisodes(const RunConfig& cfg,
                                          const DataBundle& data) {
  GRWM_REQUIRE(static_cast<int>(data.val.size()) >= cfg.eval.episodes,
               "fewer held-out trajectories than evaluation episodes");
  GRWM_REQUIRE(cfg.eval.start + cfg.eval.horizon <
                   static_cast<int>(data.ds.header.length),
               "rollout runs past the end of the trajectories");
  std::vector<latdyn::Episode> out;
  for (int e = 0; e < cfg.eval.episodes; ++e) {
    out.push_back({data.val[e], cfg.eval.start});
  }
  return out;
}

evalkit::MetricCurve RolloutCurve(const RunConfig& cfg, const DataBundle& data,
                                  const repmodel::RepModel<float>* rep,
                                  const latdyn::DynModel& dyn,
                                  const EpisodeSink& sink) {
  const std::vector<latdyn::Episode> episodes = EvalEpisodes(cfg, data);
  const int h = cfg.eval.horizon;
  const bool oracle = dyn.config().backend == latdyn::Backend::kOracle;
  GRWM_REQUIRE(oracle || rep != nullptr,
               "learned dynamics need a representation");
  std::vector<std::vector<mazeworld::Frame>> preds(episodes.size());
  std::vector<std::vector<double>> curves(episodes.size());
  ForEach(static_cast<int>(episodes.size()), cfg.run.strict, [&](int e) {
    const latdyn::Episode& ep = episodes[e];
    const trajectories::Trajectory& traj = data.ds.trajectories[ep.trajectory];
    preds[e] = oracle ? latdyn::RolloutOracleEpisode(dyn, data.map, cfg.env,
                                                     traj, ep.start, h)
                      : latdyn::RolloutEpisode(*rep, dyn, traj, ep.start, h,
                                               cfg.run.seed * 1000003 + e);
    const std::vector<mazeworld::Frame> truth(
        traj.frames.begin() + ep.start + 1,
        traj.frames.begin() + ep.start + 1 + h);
    curves[e] = evalkit::FramewiseMse(preds[e], truth);
  });
  if (sink) {
    for (size_t e = 0; e < episodes.size(); ++e) {
      const trajectories::Trajectory& traj =
          data.ds.trajectories[episodes[e].trajectory];
      const int s = episodes[e].start;
      sink(static_cast<int>(e), preds[e],
           std::vector<mazeworld::Frame>(traj.frames.begin() + s + 1,
                                         traj.frames.begin() + s + 1 + h));
    }
  }
  return evalkit::AggregateCurves(curves, cfg.eval.aggregation);
}

evalkit::ProbeReport ProbeRepresentation(const RunConfig& cfg,
                                         const DataBundle& data,
                                         const repmodel::RepModel<float>& rep) {
  evalkit::ProbeConfig pc = cfg.eval.probe;
  pc.seed = cfg.run.seed;
  return evalkit::RunProbe(StackLatents(rep, data.ds, data.train),
                           StackOracle(data, data.train),
                           StackLatents(rep, data.ds, data.val),
                           StackOracle(data, data.val), pc);
}

ClusterOutput ClusterRepresentation(const RunConfig& cfg,
                                    const DataBundle& data,
                                    const repmodel::RepModel<float>& rep) {
  ClusterOutput out;
  for (int i : data.val) {
    for (const mazeworld::Pose& p : data.ds.trajectories[i].poses) {
      out.positions.push_back({p.x, p.y});
    }
  }
  out.report = evalkit::ClusterLatents(StackLatents(rep, data.ds, data.val),
                                       out.positions, cfg.eval.clusters,
                                       cfg.run.seed);
  return out;
}

geomloss::LossReport Diagnose(const RunConfig& cfg, const DataBundle& data,
                              const repmodel::RepModel<float>& rep) {
  return repmodel::EvaluateLosses(rep, data.ds, data.val, cfg.eval.segment,
                                  cfg.loss);
}

}  // namespace grwm::cli
