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

#ifndef GRWM_EVALKIT_METRICS_H_
#define GRWM_EVALKIT_METRICS_H_

#include <string>
#include <vector>

#include "grwm/geomloss/losses.h"
#include "grwm/mazeworld/env.h"

namespace grwm::evalkit {

enum class Aggregation { kMean, kMedian };
const char* AggregationName(Aggregation a);
Aggregation ParseAggregation(const std::string& name);

// values[t-1] is the error at rollout step t.
struct MetricCurve {
  int horizon = 0;
  std::vector<double> values;
  int episodes = 0;
  Aggregation mode = Aggregation::kMean;

  // Mean of values over steps [first, last], 1-based and inclusive.
  double MeanOver(int first, int last) const;
};

// Per-step mean over pixels and channels of the squared difference, with
// pixels scaled to [0, 1].
std::vector<double> FramewiseMse(const std::vector<mazeworld::Frame>& pred,
                                 const std::vector<mazeworld::Frame>& truth);

// Combines per-episode curves of equal length step by step.
MetricCurve AggregateCurves(const std::vector<std::vector<double>>& episodes,
                            Aggregation mode);

double Median(std::vector<double> values);

struct GeometryReport {
  double slow = 0.0;
  double uniform = 0.0;
};

// Monitored regularizer values for unit-norm embeddings [B, L, D]; no
// gradients are formed.
GeometryReport MonitorGeometry(const numcore::Tensor<float>& embeddings,
                               geomloss::SlowMode mode);

}  // namespace grwm::evalkit

#endif  // GRWM_EVALKIT_METRICS_H_
