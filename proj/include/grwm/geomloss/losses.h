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

#ifndef GRWM_GEOMLOSS_LOSSES_H_
#define GRWM_GEOMLOSS_LOSSES_H_

#include <string>

#include "grwm/numcore/tape.h"

namespace grwm::geomloss {

using numcore::Tensor;
using numcore::Var;

enum class SlowMode { kAllPairs, kAdjacentOnly };
enum class ProjectionMode { kWithHead, kWithoutHead };
enum class ReconReduction { kPixelMean, kPixelSum };

const char* SlowModeName(SlowMode m);
const char* ProjectionModeName(ProjectionMode m);
const char* ReconReductionName(ReconReduction r);

struct LossConfig {
  double beta = 1e-6;
  double lambda_slow = 0.1;
  double lambda_uniform = 0.1;
  SlowMode slow_mode = SlowMode::kAllPairs;
  ProjectionMode projection = ProjectionMode::kWithHead;
  ReconReduction recon = ReconReduction::kPixelMean;

  void Validate() const;
};

// Monitored values of every term, whether weighted or not.
struct LossReport {
  double recon = 0.0;
  double kl = 0.0;
  double slow = 0.0;
  double uniform = 0.0;
  double total = 0.0;
  double weighted_kl = 0.0;
  double weighted_slow = 0.0;
  double weighted_uniform = 0.0;
};

// Plain evaluations in double precision, no tape involved. Embeddings are
// laid out [B, L, D]; frames are [..., H, W, C].
double ReconLossValue(const Tensor<double>& pred, const Tensor<double>& target,
                      ReconReduction reduction);
double KlLossValue(const Tensor<double>& mu, const Tensor<double>& logvar);
double SlowLossValue(const Tensor<double>& p, SlowMode mode);
double UniformLossValue(const Tensor<double>& p);

// Differentiable versions.
template <typename T>
Var<T> ReconLoss(Var<T> pred, Var<T> target, ReconReduction reduction);
template <typename T>
Var<T> KlLoss(Var<T> mu, Var<T> logvar);
// Distances are exact in the forward pass; the derivative of |d| uses
// d / sqrt(|d|^2 + 1e-12) so coincident embeddings have a finite gradient.
template <typename T>
Var<T> SlowLoss(Var<T> p, SlowMode mode);
// Log of the mean Gaussian kernel exp(-2 |p_i - p_j|^2) over pairs drawn from
// different trajectories (first axis).
template <typename T>
Var<T> UniformLoss(Var<T> p);


// Builds the weighted objective. Terms with zero weight are evaluated for the
// report only and contribute no gradient.
template <typename T>
Var<T> TotalLoss(Var<T> recon, Var<T> target, Var<T> mu, Var<T> logvar,
                 Var<T> embeddings, const LossConfig& cfg, LossReport* report);

// Weighted sum of monitored terms.
double CombineTerms(const LossReport& r, const LossConfig& cfg);

}  // namespace grwm::geomloss

#endif  // GRWM_GEOMLOSS_LOSSES_H_
