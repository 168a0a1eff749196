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

#include "grwm/numcore/optim.h"

#include <cmath>

namespace grwm::numcore {

template <typename T>
void Adam<T>::Step(ParamSet<T>& params, double lr) {
  GRWM_REQUIRE(lr > 0.0, "learning rate must be positive");
  auto& all = params.all();
  if (state_.m.empty()) {
    for (const Parameter<T>& p : all) {
      state_.m.emplace_back(p.value.size(), 0.0);
      state_.v.emplace_back(p.value.size(), 0.0);
    }
  }
  GRWM_REQUIRE(state_.m.size() == all.size(),
               "parameter set changed after first step");
  ++state_.step;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, double(state_.step));
  const double c2 = 1.0 - std::pow(b2, double(state_.step));
  size_t idx = 0;
  for (Parameter<T>& p : all) {
    std::vector<double>& m = state_.m[idx];
    std::vector<double>& v = state_.v[idx];
    ++idx;
    GRWM_REQUIRE(static_cast<int64_t>(m.size()) == p.value.size(),
                 "moment shape mismatch for " + p.name);
    if (p.grad.size() != p.value.size()) p.ZeroGrad();
    T* w = p.value.data();
    const T* g = p.grad.data();
    for (int64_t i = 0; i < p.value.size(); ++i) {
      const double gi = g[i];
      m[i] = b1 * m[i] + (1.0 - b1) * gi;
      v[i] = b2 * v[i] + (1.0 - b2) * gi * gi;
      const double mh = m[i] / c1;
      const double vh = v[i] / c2;
      double wi = w[i];
      if (config_.weight_decay > 0.0) wi -= lr * config_.weight_decay * wi;
      wi -= lr * mh / (std::sqrt(vh) + config_.eps);
      w[i] = T(wi);
    }
  }
}

template class Adam<float>;
template class Adam<double>;

LRSchedule::LRSchedule(double base, int64_t warmup, int64_t total,
                       double min_ratio)
    : base(base), warmup(warmup), total(total), min_ratio(min_ratio) {
  GRWM_REQUIRE(base > 0.0, "base rate must be positive");
  GRWM_REQUIRE(warmup >= 0 && total >= warmup, "need 0 <= warmup <= total");
  GRWM_REQUIRE(min_ratio > 0.0 && min_ratio <= 1.0, "min ratio in (0, 1]");
}

double LRSchedule::Rate(int64_t step) const {
  GRWM_REQUIRE(step >= 0, "negative step");
  if (step < warmup) return base * double(step) / double(warmup);
  if (step >= total) return base * min_ratio;
  const double frac = double(step - warmup) / double(total - warmup);
  return base * (1.0 - (1.0 - min_ratio) * frac);
}

}  // namespace grwm::numcore
