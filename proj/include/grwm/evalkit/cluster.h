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

#ifndef GRWM_EVALKIT_CLUSTER_H_
#define GRWM_EVALKIT_CLUSTER_H_

#include <array>
#include <cstdint>
#include <vector>

#include "grwm/numcore/tensor.h"

namespace grwm::evalkit {

struct KMeansResult {
  std::vector<int> assignments;
  numcore::Tensor<double> centroids;  // [k, d]
  int iterations = 0;
};

// k-means++ seeding from a named stream, then Lloyd iterations until the
// assignments stop changing or `max_iterations` is reached. points [N, d].
KMeansResult KMeans(const numcore::Tensor<float>& points, int k, uint64_t seed,
                    int max_iterations = 100);

// Size-weighted mean of within-cluster positional variance over the global
// positional variance. 0 when every cluster sits on one point; about 1 when
// labels carry no spatial information. Empty labels are skipped.
double SpatialDispersion(const std::vector<int>& assignments,
                         const std::vector<std::array<double, 2>>& positions);

struct ClusterReport {
  int k = 0;
  std::vector<int> assignments;
  double dispersion = 0.0;
  std::vector<int> counts;
};

ClusterReport ClusterLatents(const numcore::Tensor<float>& latents,
                             const std::vector<std::array<double, 2>>& positions,
                             int k, uint64_t seed);

}  // namespace grwm::evalkit

#endif  // GRWM_EVALKIT_CLUSTER_H_
