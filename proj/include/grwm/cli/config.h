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

#ifndef GRWM_CLI_CONFIG_H_
#define GRWM_CLI_CONFIG_H_

#include <map>
#include <string>
#include <vector>

#include "grwm/evalkit/metrics.h"
#include "grwm/evalkit/probe.h"
#include "grwm/geomloss/losses.h"
#include "grwm/latdyn/dynamics.h"
#include "grwm/mazeworld/env.h"
#include "grwm/repmodel/rep_model.h"
#include "grwm/repmodel/trainer.h"
#include "grwm/trajectories/dataset.h"

namespace grwm::cli {

struct DataConfig {
  trajectories::MazeSpec maze;
  trajectories::CollectConfig collect;
  // Fraction of trajectories held out for evaluation.
  double val_fraction = 0.1;
  uint64_t split_seed = 1;
};

struct EvalConfig {
  int horizon = 63;
  int episodes = 20;
  // Last observed frame index; rollouts predict start+1..start+horizon.
  int start = 32;
  evalkit::Aggregation aggregation = evalkit::Aggregation::kMean;
  int clusters = 20;
  int segment = 16;
  evalkit::ProbeConfig probe;
  // Every n-th rollout step goes into the PPM strips; 0 disables them.
  int strip_every = 8;
};

struct RunSettings {
  uint64_t seed = 1;
  std::string precision = "float32";
  bool strict = true;
  std::string output_dir;
};

// Every section mirrors the owning module's configuration. Defaults are the
// desk-scale setup: 16x16 frames, two encoder stages, 3x3 maze.
struct RunConfig {
  mazeworld::EnvConfig env;
  DataConfig data;
  repmodel::RepConfig rep;
  repmodel::AeTrainConfig ae;
  geomloss::LossConfig loss;
  latdyn::DynConfig dyn;
  latdyn::DynTrainConfig dyn_train;
  EvalConfig eval;
  RunSettings run;

  RunConfig();
  // Cross-section checks on top of each module's own validation.
  void Validate() const;
};

// Sets `key` (e.g. "loss.lambda_uniform") from its text form. Throws
// FormatError(kMalformed) for unknown keys and unparsable values.
void SetKey(RunConfig& cfg, const std::string& key, const std::string& value);
std::string GetKey(const RunConfig& cfg, const std::string& key);
std::vector<std::string> ConfigKeys();

// "key = value" lines; '#' starts a comment. Later lines override earlier
// ones.
void ApplyConfigText(RunConfig& cfg, const std::string& text);
RunConfig LoadConfig(const std::string& path);
// Every key with its resolved value, in a stable order.
std::string ResolvedConfigText(const RunConfig& cfg);

}  // namespace grwm::cli

#endif  // GRWM_CLI_CONFIG_H_
