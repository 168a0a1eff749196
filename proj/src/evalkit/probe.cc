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

#include "grwm/evalkit/probe.h"

#include <algorithm>
#include <cmath>

#include "grwm/common/errors.h"
#include "grwm/numcore/layers.h"
#include "grwm/numcore/ops.h"
#include "grwm/numcore/optim.h"

namespace grwm::evalkit {
namespace {

using numcore::Tensor;

struct Standardizer {
  std::vector<float> mean, scale;

  static Standardizer Fit(const Tensor<float>& x) {
    const int64_t n = x.dim(0), d = x.dim(1);
    Standardizer s{std::vector<float>(d), std::vector<float>(d)};
    for (int64_t k = 0; k < d; ++k) {
      double s1 = 0, s2 = 0;
      for (int64_t i = 0; i < n; ++i) {
        s1 += x[i * d + k];
        s2 += double(x[i * d + k]) * x[i * d + k];
      }
      const double m = s1 / n;
      s.mean[k] = float(m);
      s.scale[k] = float(std::max(1e-6, std::sqrt(std::max(0.0, s2 / n - m * m))));
    }
    return s;
  }

  Tensor<float> Apply(const Tensor<float>& x) const {
    Tensor<float> out(x.shape());
    const int64_t d = x.dim(1);
    for (int64_t i = 0; i < x.size(); ++i) {
      out[i] = (x[i] - mean[i % d]) / scale[i % d];
    }
    return out;
  }
};

}  // namespace

ProbeReport RunProbe(const Tensor<float>& train_x, const Tensor<float>& train_y,
                     const Tensor<float>& val_x, const Tensor<float>& val_y,
                     const ProbeConfig& cfg) {
  GRWM_REQUIRE(train_x.rank() == 2 && train_y.rank() == 2 &&
                   val_x.rank() == 2 && val_y.rank() == 2,
               "probe inputs must be matrices");
  GRWM_REQUIRE(train_x.dim(0) >= 2 && val_x.dim(0) >= 1,
               "degenerate split: need training and held-out rows");
  GRWM_REQUIRE(train_x.dim(0) == train_y.dim(0) &&
                   val_x.dim(0) == val_y.dim(0),
               "features and targets differ in row count");
  GRWM_REQUIRE(train_x.dim(1) == val_x.dim(1) &&
                   train_y.dim(1) == val_y.dim(1),
               "train and held-out widths differ");
  GRWM_REQUIRE(cfg.steps >= 1 && cfg.batch >= 1 && cfg.layers >= 1,
               "bad probe recipe");
  const int64_t n = train_x.dim(0), d = train_x.dim(1), c = train_y.dim(1);
  const Standardizer sx = Standardizer::Fit(train_x);
  const Standardizer sy = Standardizer::Fit(train_y);
  const Tensor<float> x = sx.Apply(train_x), y = sy.Apply(train_y);

  numcore::ParamSet<float> ps;
  numcore::RandomStream init(cfg.seed, "evalkit/probe/init");
  std::vector<numcore::Linear<float>> layers;
  int64_t width = d;
  for (int l = 0; l < cfg.layers; ++l) {
    layers.push_back(numcore::Linear<float>::Create(
        ps, "h" + std::to_string(l), width, cfg.hidden, init, true,
        std::sqrt(2.0)));
    width = cfg.hidden;
  }
  const auto head = numcore::Linear<float>::Create(ps, "out", width, c, init);
  auto forward = [&](numcore::Tape<float>& tape, numcore::Var<float> h) {
    for (const auto& l : layers) {
      h = numcore::ops::Relu(numcore::Apply(tape, l, h));
    }
    return numcore::Apply(tape, head, h);
  };

  numcore::Adam<float> adam({0.9, 0.999, 1e-8, cfg.weight_decay});
  const numcore::LRSchedule schedule(cfg.lr, std::min(100, cfg.steps),
                                     cfg.steps, 0.05);
  const int64_t b = std::min<int64_t>(cfg.batch, n);
  for (int step = 1; step <= cfg.steps; ++step) {
    numcore::RandomStream rng(cfg.seed, "evalkit/probe/batch", step);
    Tensor<float> bx({b, d}), by({b, c});
    for (int64_t i = 0; i < b; ++i) {
      const int64_t r = static_cast<int64_t>(rng.UniformInt(n));
      std::copy(x.data() + r * d, x.data() + (r + 1) * d, bx.data() + i * d);
      std::copy(y.data() + r * c, y.data() + (r + 1) * c, by.data() + i * c);
    }
    numcore::Tape<float> tape;
    auto pred = forward(tape, tape.Constant(std::move(bx)));
    auto loss = numcore::ops::Mean(numcore::ops::Square(
        numcore::ops::Sub(pred, tape.Constant(std::move(by)))));
    ps.ZeroGrad();
    tape.Backward(loss);
    adam.Step(ps, schedule.Rate(step));
  }

  numcore::Tape<float> tape;
  const Tensor<float> pred =
      forward(tape, tape.Constant(sx.Apply(val_x))).value();
  ProbeReport r;
  r.train_size = n;
  r.val_size = val_x.dim(0);
  r.component_mse.assign(c, 0.0);
  for (int64_t i = 0; i < r.val_size; ++i) {
    for (int64_t k = 0; k < c; ++k) {
      const double p = double(pred[i * c + k]) * sy.scale[k] + sy.mean[k];
      const double e = p - val_y[i * c + k];
      r.component_mse[k] += e * e / r.val_size;
    }
  }
  for (double v : r.component_mse) r.mse += v / c;
  return r;
}

}  // namespace grwm::evalkit
