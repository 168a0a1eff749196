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

#ifndef GRWM_NUMCORE_OPTIM_H_
#define GRWM_NUMCORE_OPTIM_H_

#include <cstdint>
#include <vector>

#include "grwm/numcore/params.h"

namespace grwm::numcore {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  // Decoupled (AdamW-style); 0 disables.
  double weight_decay = 0.0;
};

// Moment accumulators for one parameter set. Moments are kept in double so
// 32-bit training does not lose small second-moment updates.
struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  int64_t step = 0;
};

template <typename T>
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  // One bias-corrected update of every parameter in `params` using its
  // accumulated gradient.
  void Step(ParamSet<T>& params, double lr);

  const AdamState& state() const { return state_; }
  const AdamConfig& config() const { return config_; }

 private:
  AdamConfig config_;
  AdamState state_;
};

// Linear warmup from 0 to `base`, then linear decay to base*min_ratio at
// `total` steps, constant afterwards.
struct LRSchedule {
  double base = 5e-4;
  int64_t warmup = 1000;
  int64_t total = 10000;
  double min_ratio = 0.1;

  LRSchedule() = default;
  LRSchedule(double base, int64_t warmup, int64_t total, double min_ratio);

  double Rate(int64_t step) const;
};

}  // namespace grwm::numcore

#endif  // GRWM_NUMCORE_OPTIM_H_
