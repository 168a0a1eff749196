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

#ifndef GRWM_TESTS_SUPPORT_DIFFUSION_TOY_H_
#define GRWM_TESTS_SUPPORT_DIFFUSION_TOY_H_

#include <array>
#include <cmath>
#include <vector>

#include "grwm/latdyn/dynamics.h"

namespace grwm::testing {

// Latent sequences whose one-step changes are i.i.d. draws from a fixed
// axis-aligned 2-D Gaussian, independent of context and action. The only way
// to match them is to learn the distribution itself.
struct GaussianToy {
  std::array<double, 2> mean{0.8, -0.4};
  std::array<double, 2> stddev{0.5, 1.5};
  int sequences = 32;
  int length = 64;
};

struct Moments {
  std::array<double, 2> mean{};
  std::array<double, 2> var{};
};

inline std::vector<latdyn::Sequence> MakeGaussianToy(const GaussianToy& toy,
                                                     uint64_t seed) {
  numcore::RandomStream rng(seed, "tests/gaussian_toy");
  std::vector<latdyn::Sequence> out(toy.sequences);
  for (latdyn::Sequence& s : out) {
    s.states = numcore::Tensor<float>({toy.length, 2});
    for (int t = 0; t < toy.length; ++t) {
      s.actions.push_back(static_cast<mazeworld::Action>(rng.UniformInt(3)));
      for (int k = 0; k < 2; ++k) {
        const double prev = t == 0 ? 0.0 : s.states[(t - 1) * 2 + k];
        const double step =
            t == 0 ? 0.0 : toy.mean[k] + toy.stddev[k] * rng.Normal();
        s.states[t * 2 + k] = static_cast<float>(prev + step);
      }
    }
  }
  return out;
}

inline Moments DataMoments(const std::vector<latdyn::Sequence>& data) {
  Moments m;
  std::array<double, 2> s1{}, s2{};
  double n = 0;
  for (const latdyn::Sequence& s : data) {
    for (int t = 0; t + 1 < s.states.dim(0); ++t) {
      for (int k = 0; k < 2; ++k) {
        const double d = double(s.states[(t + 1) * 2 + k]) - s.states[t * 2 + k];
        s1[k] += d;
        s2[k] += d * d;
      }
      n += 1;
    }
  }
  for (int k = 0; k < 2; ++k) {
    m.mean[k] = s1[k] / n;
    m.var[k] = s2[k] / n - m.mean[k] * m.mean[k];
  }
  return m;
}

// Predicted one-step changes for `count` contexts drawn from the data.
inline Moments SampledMoments(const latdyn::DynModel& model,
                              const std::vector<latdyn::Sequence>& data,
                              int count, uint64_t seed) {
  const int m = model.config().context;
  const auto positions = latdyn::SamplePositions(data, m);
  numcore::RandomStream pick(seed, "tests/gaussian_toy/pick");
  numcore::Tensor<float> ctx({count, m, 2});
  std::vector<mazeworld::Action> actions(count);
  for (int i = 0; i < count; ++i) {
    const auto [traj, t] = positions[pick.UniformInt(positions.size())];
    const latdyn::Sequence& s = data[traj];
    for (int j = 0; j < m * 2; ++j) {
      ctx[i * m * 2 + j] = s.states[(t - m + 1) * 2 + j];
    }
    actions[i] = s.actions[t];
  }
  numcore::RandomStream noise(seed, "tests/gaussian_toy/noise");
  const numcore::Tensor<float> next = model.Predict(ctx, actions, &noise);
  Moments out;
  for (int k = 0; k < 2; ++k) {
    double s1 = 0, s2 = 0;
    for (int i = 0; i < count; ++i) {
      const double d = double(next[i * 2 + k]) - ctx[(i * m + m - 1) * 2 + k];
      s1 += d;
      s2 += d * d;
    }
    out.mean[k] = s1 / count;
    out.var[k] = s2 / count - out.mean[k] * out.mean[k];
  }
  return out;
}

}  // namespace grwm::testing

#endif  // GRWM_TESTS_SUPPORT_DIFFUSION_TOY_H_
