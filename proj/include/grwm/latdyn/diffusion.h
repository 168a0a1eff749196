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

#ifndef GRWM_LATDYN_DIFFUSION_H_
#define GRWM_LATDYN_DIFFUSION_H_

#include <functional>
#include <vector>

#include "grwm/numcore/rng.h"
#include "grwm/numcore/tensor.h"

namespace grwm::latdyn {

using numcore::Tensor;

// Discrete noise levels t = 0..T. Index 0 is the clean end (log-SNR at the
// upper clip) and index T the pure-noise end (log-SNR at the lower clip).
struct DiffusionSchedule {
  int steps = 0;
  std::vector<double> alpha_bar;
  std::vector<double> log_snr;

  double snr(int t) const { return alpha_bar[t] / (1.0 - alpha_bar[t]); }
};

// Cosine schedule, shifted by a constant log-SNR offset of -2 ln(shift) and
// clipped to [-noise_clip, noise_clip]; alpha_bar = sigmoid(log-SNR).
DiffusionSchedule BuildSchedule(int steps, double shift, double noise_clip);

// v = sqrt(a) eps - sqrt(1-a) z0 for a = alpha_bar[t].
Tensor<double> VTarget(const Tensor<double>& z0, const Tensor<double>& eps,
                       int t, const DiffusionSchedule& s);
// x_t = sqrt(a) z0 + sqrt(1-a) eps.
Tensor<double> NoisyInput(const Tensor<double>& z0, const Tensor<double>& eps,
                          int t, const DiffusionSchedule& s);
// z0 = sqrt(a) x_t - sqrt(1-a) v.
Tensor<double> RecoverZ0(const Tensor<double>& xt, const Tensor<double>& v,
                         int t, const DiffusionSchedule& s);

// min(snr, gamma) / (snr + 1): the min-SNR weight expressed for a
// v-prediction loss.
double MinSnrWeight(double snr, double gamma);
// Weights for t = 0..T. With decay > 0 the table is smoothed by an
// exponential moving average along t.
std::vector<double> MinSnrWeights(const DiffusionSchedule& s, double gamma,
                                  double decay);

// Noise levels visited by a strided sampler, from T down to the last level
// before the clean end.
std::vector<int> SamplerTimesteps(int schedule_steps, int sampler_steps);

// Velocity model: (x_t, t) -> predicted v, rows of x are independent samples.
using VelocityFn =
    std::function<Tensor<double>(const Tensor<double>& x, int t)>;

// DDIM from x_T = `noise`. The final step lands on the clean end and returns
// the z0 estimate. eta = 0 is deterministic given `noise`; eta > 0 draws
// extra noise from `rng`.
Tensor<double> DdimSample(const DiffusionSchedule& s, int sampler_steps,
                          double eta, Tensor<double> noise,
                          const VelocityFn& model,
                          numcore::RandomStream* rng = nullptr);

}  // namespace grwm::latdyn

#endif  // GRWM_LATDYN_DIFFUSION_H_
