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

#ifndef GRWM_NUMCORE_GRADCHECK_H_
#define GRWM_NUMCORE_GRADCHECK_H_

#include <functional>
#include <string>
#include <vector>

#include "grwm/numcore/params.h"
#include "grwm/numcore/tape.h"

namespace grwm::numcore {

struct GradCheckOptions {
  double step = 1e-5;
  double tolerance = 1e-6;
  // Denominator floor for the relative error, so near-zero gradients are
  // compared in absolute terms.
  double denominator_floor = 1e-3;
  // Check at most this many entries per array (evenly strided); 0 = all.
  int64_t max_entries_per_array = 0;
};

struct GradCheckResult {
  std::string name;
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  int64_t entries_checked = 0;
  bool passed = false;
  // Where the worst entry was found.
  std::string worst;
};

using ScalarFn =
    std::function<Var<double>(Tape<double>&, const std::vector<Var<double>>&)>;

// Compares tape gradients of f with respect to each input against central
// differences.
GradCheckResult CheckInputGradients(const std::string& name, const ScalarFn& f,
                                    std::vector<Tensor<double>> inputs,
                                    const GradCheckOptions& opts = {});

// Same, with respect to every parameter in `params`; f rebuilds the graph
// from the current parameter values on each call.
GradCheckResult CheckParamGradients(
    const std::string& name, const std::function<Var<double>(Tape<double>&)>& f,
    ParamSet<double>& params, const GradCheckOptions& opts = {});

}  // namespace grwm::numcore

#endif  // GRWM_NUMCORE_GRADCHECK_H_
