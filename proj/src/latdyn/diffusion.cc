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

#include "grwm/latdyn/diffusion.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "grwm/common/errors.h"

namespace grwm::latdyn {
namespace {

double Sigmoid(double x) {
  return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

template <typename F>
Tensor<double> Combine(const Tensor<double>& a, const Tensor<double>& b, F f) {
  GRWM_REQUIRE(a.shape() == b.shape(), "shape mismatch " +
                                           numcore::ShapeString(a.shape()) +
                                           " vs " +
                                           numcore::ShapeString(b.shape()));
  Tensor<double> out(a.shape());
  for (int64_t i = 0; i < a.size(); ++i) out[i] = f(a[i], b[i]);
  return out;
}

void CheckLevel(int t, const DiffusionSchedule& s) {
  GRWM_REQUIRE(t >= 0 && t <= s.steps, "noise level out of range");
}

}  // namespace

DiffusionSchedule BuildSchedule(int steps, double shift, double noise_clip) {
  GRWM_REQUIRE(steps >= 2, "need at least two diffusion steps");
  GRWM_REQUIRE(shift > 0.0 && noise_clip > 0.0,
               "shift and noise clip must be positive");
  DiffusionSchedule s;
  s.steps = steps;
  s.alpha_bar.resize(steps + 1);
  s.log_snr.resize(steps + 1);
  const double offset = -2.0 * std::log(shift);
  for (int t = 0; t <= steps; ++t) {
    const double u = double(t) / steps;
    // cos^2 / sin^2 of (pi u / 2) in log space; infinite at both ends.
    double lsnr;
    if (t == 0) {
      lsnr = noise_clip;
    } else if (t == steps) {
      lsnr = -noise_clip;
    } else {
      lsnr = -2.0 * std::log(std::tan(std::numbers::pi * u / 2.0)) + offset;
    }
    lsnr = std::clamp(lsnr, -noise_clip, noise_clip);
    s.log_snr[t] = lsnr;
    s.alpha_bar[t] = Sigmoid(lsnr);
  }
  return s;
}

Tensor<double> VTarget(const Tensor<double>& z0, const Tensor<double>& eps,
                       int t, const DiffusionSchedule& s) {
  CheckLevel(t, s);
  const double a = std::sqrt(s.alpha_bar[t]);
  const double b = std::sqrt(1.0 - s.alpha_bar[t]);
  return Combine(z0, eps, [a, b](double z, double e) { return a * e - b * z; });
}

Tensor<double> NoisyInput(const Tensor<double>& z0, const Tensor<double>& eps,
                          int t, const DiffusionSchedule& s) {
  CheckLevel(t, s);
  const double a = std::sqrt(s.alpha_bar[t]);
  const double b = std::sqrt(1.0 - s.alpha_bar[t]);
  return Combine(z0, eps, [a, b](double z, double e) { return a * z + b * e; });
}

Tensor<double> RecoverZ0(const Tensor<double>& xt, const Tensor<double>& v,
                         int t, const DiffusionSchedule& s) {
  CheckLevel(t, s);
  const double a = std::sqrt(s.alpha_bar[t]);
  const double b = std::sqrt(1.0 - s.alpha_bar[t]);
  return Combine(xt, v, [a, b](double x, double w) { return a * x - b * w; });
}

double MinSnrWeight(double snr, double gamma) {
  GRWM_REQUIRE(gamma > 0.0, "SNR clip must be positive");
  return std::min(snr, gamma) / (snr + 1.0);
}

std::vector<double> MinSnrWeights(const DiffusionSchedule& s, double gamma,
                                  double decay) {
  GRWM_REQUIRE(decay >= 0.0 && decay < 1.0, "decay in [0, 1)");
  std::vector<double> w(s.steps + 1);
  for (int t = 0; t <= s.steps; ++t) w[t] = MinSnrWeight(s.snr(t), gamma);
  if (decay > 0.0) {
    for (int t = 1; t <= s.steps; ++t) {
      w[t] = decay * w[t - 1] + (1.0 - decay) * w[t];
    }
  }
  return w;
}

std::vector<int> SamplerTimesteps(int schedule_steps, int sampler_steps) {
  GRWM_REQUIRE(sampler_steps >= 1 && sampler_steps <= schedule_steps,
               "sampler steps must be in [1, T]");
  std::vector<int> ts;
  for (int i = sampler_steps; i >= 1; --i) {
    ts.push_back(static_cast<int>(
        std::lround(double(i) * schedule_steps / sampler_steps)));
  }
  return ts;
}

Tensor<double> DdimSample(const DiffusionSchedule& s, int sampler_steps,
                          double eta, Tensor<double> noise,
                          const VelocityFn& model, numcore::RandomStream* rng) {
  GRWM_REQUIRE(eta >= 0.0, "eta must be non-negative");
  GRWM_REQUIRE(eta == 0.0 || rng != nullptr, "eta > 0 needs a noise stream");
  const std::vector<int> ts = SamplerTimesteps(s.steps, sampler_steps);
  Tensor<double> x = std::move(noise);
  for (size_t i = 0; i < ts.size(); ++i) {
    const int t = ts[i];
    const double a = s.alpha_bar[t];
    const double sa = std::sqrt(a), sb = std::sqrt(1.0 - a);
    const Tensor<double> v = model(x, t);
    GRWM_REQUIRE(v.shape() == x.shape(), "velocity shape mismatch");
    const bool last = i + 1 == ts.size();
    if (last) {
      for (int64_t k = 0; k < x.size(); ++k) x[k] = sa * x[k] - sb * v[k];
      break;
    }
    const double ap = s.alpha_bar[ts[i + 1]];
    const double sigma =
        eta * std::sqrt((1.0 - ap) / (1.0 - a)) * std::sqrt(1.0 - a / ap);
    const double dir = std::sqrt(std::max(0.0, 1.0 - ap - sigma * sigma));
    for (int64_t k = 0; k < x.size(); ++k) {
      const double z0 = sa * x[k] - sb * v[k];
      const double eps = sb * x[k] + sa * v[k];
      x[k] = std::sqrt(ap) * z0 + dir * eps;
      if (sigma > 0.0) x[k] += sigma * rng->Normal();
    }
  }
  return x;
}

}  // namespace grwm::latdyn
