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

#ifndef GRWM_EVALKIT_PROBE_H_
#define GRWM_EVALKIT_PROBE_H_

#include <cstdint>
#include <vector>

#include "grwm/numcore/tensor.h"

namespace grwm::evalkit {

// One recipe for every model under comparison so probe capacity and budget
// never differ between them.
struct ProbeConfig {
  int hidden = 128;
  int layers = 2;
  int steps = 2000;
  int batch = 256;
  double lr = 1e-3;
  double weight_decay = 1e-4;
  uint64_t seed = 1;
};

struct ProbeReport {
  double mse = 0.0;  // mean over components
  std::vector<double> component_mse;
  int64_t train_size = 0;
  int64_t val_size = 0;
};

// Features [N, d] and targets [N, c]. Inputs and targets are standardized
// with training statistics; errors are reported in target units on the
// held-out rows only.
ProbeReport RunProbe(const numcore::Tensor<float>& train_x,
                     const numcore::Tensor<float>& train_y,
                     const numcore::Tensor<float>& val_x,
                     const numcore::Tensor<float>& val_y,
                     const ProbeConfig& cfg = {});

}  // namespace grwm::evalkit

#endif  // GRWM_EVALKIT_PROBE_H_
