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

#include "grwm/evalkit/cluster.h"

#include <limits>
#include <map>

#include "grwm/common/errors.h"
#include "grwm/numcore/rng.h"

namespace grwm::evalkit {
namespace {

double SquaredDistance(const float* a, const double* b, int64_t d) {
  double s = 0.0;
  for (int64_t j = 0; j < d; ++j) {
    const double e = a[j] - b[j];
    s += e * e;
  }
  return s;
}

}  // namespace

KMeansResult KMeans(const numcore::Tensor<float>& points, int k, uint64_t seed,
                    int max_iterations) {
  GRWM_REQUIRE(points.rank() == 2, "points must be [N, d]");
  GRWM_REQUIRE(k >= 1, "k must be positive");
  const int64_t n = points.dim(0), d = points.dim(1);
  GRWM_REQUIRE(n >= k, "fewer points (" + std::to_string(n) + ") than k (" +
                           std::to_string(k) + ")");
  GRWM_REQUIRE(max_iterations >= 1, "need at least one iteration");
  const float* x = points.data();
  KMeansResult r;
  r.centroids = numcore::Tensor<double>({k, d});
  double* cen = r.centroids.data();

  // k-means++: each new center is drawn with probability proportional to the
  // squared distance to the nearest existing one.
  numcore::RandomStream rng(seed, "evalkit/kmeans");
  const int64_t first = static_cast<int64_t>(rng.UniformInt(n));
  std::copy(x + first * d, x + (first + 1) * d, cen);
  std::vector<double> nearest(n);
  for (int64_t i = 0; i < n; ++i) nearest[i] = SquaredDistance(x + i * d, cen, d);
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (double v : nearest) total += v;
    int64_t pick = n - 1;
    if (total > 0.0) {
      double u = rng.Uniform() * total;
      for (int64_t i = 0; i < n; ++i) {
        u -= nearest[i];
        if (u < 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<int64_t>(rng.UniformInt(n));
    }
    std::copy(x + pick * d, x + (pick + 1) * d, cen + c * d);
    for (int64_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i], SquaredDistance(x + i * d, cen + c * d, d));
    }
  }

  r.assignments.assign(n, -1);
  std::vector<double> sums(size_t(k) * d);
  std::vector<int64_t> counts(k);
  for (r.iterations = 1; r.iterations <= max_iterations; ++r.iterations) {
    bool changed = false;
    for (int64_t i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double dist = SquaredDistance(x + i * d, cen + c * d, d);
        if (dist < best_d) {
          best_d = dist;
          best = c;
        }
      }
      if (r.assignments[i] != best) {
        r.assignments[i] = best;
        changed = true;
      }
    }
    if (!changed) break;
    std::fill(sums.begin(), sums.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0);
    for (int64_t i = 0; i < n; ++i) {
      const int c = r.assignments[i];
      ++counts[c];
      for (int64_t j = 0; j < d; ++j) sums[c * d + j] += x[i * d + j];
    }
    // An emptied cluster keeps its previous center.
    for (int c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      for (int64_t j = 0; j < d; ++j) cen[c * d + j] = sums[c * d + j] / counts[c];
    }
  }
  r.iterations = std::min(r.iterations, max_iterations);
  return r;
}

double SpatialDispersion(const std::vector<int>& assignments,
                         const std::vector<std::array<double, 2>>& positions) {
  GRWM_REQUIRE(assignments.size() == positions.size(),
               "one position per assignment");
  GRWM_REQUIRE(!positions.empty(), "no points");
  auto variance = [&](const std::vector<size_t>& idx) {
    double m[2] = {0, 0}, s = 0;
    for (size_t i : idx) {
      m[0] += positions[i][0];
      m[1] += positions[i][1];
    }
    m[0] /= idx.size();
    m[1] /= idx.size();
    for (size_t i : idx) {
      const double dx = positions[i][0] - m[0], dy = positions[i][1] - m[1];
      s += dx * dx + dy * dy;
    }
    return s / idx.size();
  };
  std::vector<size_t> all(positions.size());
  std::map<int, std::vector<size_t>> groups;
  for (size_t i = 0; i < positions.size(); ++i) {
    all[i] = i;
    groups[assignments[i]].push_back(i);
  }
  const double global = variance(all);
  GRWM_REQUIRE(global > 0.0, "positions have no spread");
  double within = 0.0;
  for (const auto& [label, idx] : groups) {
    within += double(idx.size()) * variance(idx);
  }
  return within / (positions.size() * global);
}

ClusterReport ClusterLatents(const numcore::Tensor<float>& latents,
                             const std::vector<std::array<double, 2>>& positions,
                             int k, uint64_t seed) {
  ClusterReport r;
  r.k = k;
  r.assignments = KMeans(latents, k, seed).assignments;
  r.dispersion = SpatialDispersion(r.assignments, positions);
  r.counts.assign(k, 0);
  for (int a : r.assignments) ++r.counts[a];
  return r;
}

}  // namespace grwm::evalkit
