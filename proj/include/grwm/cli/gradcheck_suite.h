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

#ifndef GRWM_CLI_GRADCHECK_SUITE_H_
#define GRWM_CLI_GRADCHECK_SUITE_H_

#include <string>
#include <vector>

#include "grwm/numcore/gradcheck.h"

namespace grwm::cli {

struct GradCheckCase {
  std::string name;
  numcore::ScalarFn fn;
  std::vector<numcore::Tensor<double>> inputs;
};

// Every differentiable primitive plus the regularizers, the KL and
// reconstruction terms, and the projection-normalization chain, each on
// fixed random float64 inputs kept away from kinks.
std::vector<GradCheckCase> StandardGradChecks();

std::vector<numcore::GradCheckResult> RunGradChecks(
    const std::vector<GradCheckCase>& cases,
    const numcore::GradCheckOptions& opts = {});

}  // namespace grwm::cli

#endif  // GRWM_CLI_GRADCHECK_SUITE_H_
