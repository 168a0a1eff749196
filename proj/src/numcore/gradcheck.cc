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

#include "grwm/numcore/gradcheck.h"

#include <algorithm>
#include <cmath>

namespace grwm::numcore {
namespace {

struct Worst {
  double err = 0.0;
  std::string where;
  int64_t checked = 0;

  void Update(double analytic, double numeric, double floor,
              const std::string& where_now) {
    const double denom =
        std::max({std::abs(analytic), std::abs(numeric), floor});
    const double e = std::abs(analytic - numeric) / denom;
    ++checked;
    if (e > err || !std::isfinite(e)) {
      err = std::isfinite(e) ? e : INFINITY;
      where = where_now + " analytic=" + std::to_string(analytic) +
              " numeric=" + std::to_string(numeric);
    }
  }
};

int64_t Stride(int64_t n, int64_t max_entries) {
  if (max_entries <= 0 || n <= max_entries) return 1;
  return (n + max_entries - 1) / max_entries;
}

}  // namespace

GradCheckResult CheckInputGradients(const std::string& name, const ScalarFn& f,
                                    std::vector<Tensor<double>> inputs,
                                    const GradCheckOptions& opts) {
  auto evaluate = [&](bool backward, std::vector<Tensor<double>>* grads) {
    Tape<double> tape;
    std::vector<Var<double>> vars;
    for (const Tensor<double>& t : inputs) vars.push_back(tape.Variable(t));
    Var<double> out = f(tape, vars);
    const double v = out.value().item();
    if (backward) {
      tape.Backward(out);
      for (const Var<double>& x : vars) grads->push_back(tape.grad(x.id));
    }
    return v;
  };
  std::vector<Tensor<double>> analytic;
  evaluate(true, &analytic);
  Worst worst;
  for (size_t a = 0; a < inputs.size(); ++a) {
    const int64_t stride = Stride(inputs[a].size(), opts.max_entries_per_array);
    for (int64_t i = 0; i < inputs[a].size(); i += stride) {
      const double orig = inputs[a][i];
      inputs[a][i] = orig + opts.step;
      const double up = evaluate(false, nullptr);
      inputs[a][i] = orig - opts.step;
      const double down = evaluate(false, nullptr);
      inputs[a][i] = orig;
      const double numeric = (up - down) / (2.0 * opts.step);
      worst.Update(analytic[a][i], numeric, opts.denominator_floor,
                   "input " + std::to_string(a) + "[" + std::to_string(i) +
                       "]");
    }
  }
  return {name, worst.err, opts.tolerance, worst.checked,
          worst.err < opts.tolerance, worst.where};
}

GradCheckResult CheckParamGradients(
    const std::string& name, const std::function<Var<double>(Tape<double>&)>& f,
    ParamSet<double>& params, const GradCheckOptions& opts) {
  params.ZeroGrad();
  {
    Tape<double> tape;
    tape.Backward(f(tape));
  }
  std::vector<Tensor<double>> analytic;
  for (const Parameter<double>& p : params.all()) analytic.push_back(p.grad);
  auto value = [&]() {
    Tape<double> tape;
    return f(tape).value().item();
  };
  Worst worst;
  size_t a = 0;
  for (Parameter<double>& p : params.all()) {
    const int64_t stride = Stride(p.value.size(), opts.max_entries_per_array);
    for (int64_t i = 0; i < p.value.size(); i += stride) {
      const double orig = p.value[i];
      p.value[i] = orig + opts.step;
      const double up = value();
      p.value[i] = orig - opts.step;
      const double down = value();
      p.value[i] = orig;
      worst.Update(analytic[a][i], (up - down) / (2.0 * opts.step),
                   opts.denominator_floor,
                   p.name + "[" + std::to_string(i) + "]");
    }
    ++a;
  }
  return {name, worst.err, opts.tolerance, worst.checked,
          worst.err < opts.tolerance, worst.where};
}

}  // namespace grwm::numcore
