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

#include "grwm/cli/gradcheck_suite.h"

#include <cmath>

#include "grwm/geomloss/losses.h"
#include "grwm/numcore/ops.h"
#include "grwm/numcore/rng.h"

namespace grwm::cli {
namespace {

using numcore::Shape;
using numcore::Tape;
using numcore::Tensor;
using numcore::Var;
using Vars = std::vector<Var<double>>;
namespace ops = numcore::ops;

Tensor<double> Uniform(Shape shape, uint64_t seed, double lo = -1.0,
                       double hi = 1.0) {
  numcore::RandomStream rng(seed, "gradcheck/input");
  Tensor<double> t(std::move(shape));
  for (double& v : t.values()) v = lo + (hi - lo) * rng.Uniform();
  return t;
}

// Same, with every entry at least 0.05 away from zero.
Tensor<double> AwayFromZero(Shape shape, uint64_t seed) {
  Tensor<double> t = Uniform(std::move(shape), seed);
  for (double& v : t.values()) v += v > 0 ? 0.05 : -0.05;
  return t;
}

// Rows of unit norm, [b, l, d].
Tensor<double> UnitRows(int64_t b, int64_t l, int64_t d, uint64_t seed) {
  numcore::RandomStream rng(seed, "gradcheck/unit");
  Tensor<double> t({b, l, d});
  for (int64_t r = 0; r < b * l; ++r) {
    double n = 0;
    for (int64_t k = 0; k < d; ++k) {
      t[r * d + k] = rng.Normal();
      n += t[r * d + k] * t[r * d + k];
    }
    for (int64_t k = 0; k < d; ++k) t[r * d + k] /= std::sqrt(n);
  }
  return t;
}

// Weighted sum with fixed random weights so every output element reaches
// the scalar with its own coefficient.
Var<double> Probe(Var<double> y) {
  return ops::Sum(ops::Mul(y, y.tape->Constant(Uniform(y.shape(), 99))));
}

template <typename F>
GradCheckCase Unary(std::string name, F op, Tensor<double> x) {
  return {std::move(name),
          [op](Tape<double>&, const Vars& v) { return Probe(op(v[0])); },
          {std::move(x)}};
}

}  // namespace

std::vector<GradCheckCase> StandardGradChecks() {
  using geomloss::SlowMode;
  std::vector<GradCheckCase> c;
  const Tensor<double> a = Uniform({3, 2}, 1), b = Uniform({3, 2}, 2);
  c.push_back({"add", [](Tape<double>&, const Vars& v) {
                 return Probe(ops::Add(v[0], v[1]));
               }, {a, b}});
  c.push_back({"sub", [](Tape<double>&, const Vars& v) {
                 return Probe(ops::Sub(v[0], v[1]));
               }, {a, b}});
  c.push_back({"mul", [](Tape<double>&, const Vars& v) {
                 return Probe(ops::Mul(v[0], v[1]));
               }, {a, b}});
  c.push_back(Unary("scale", [](Var<double> x) {
    return ops::AddScalar(ops::Scale(x, -1.7), 0.3);
  }, Uniform({4}, 3)));

  const Tensor<double> x = AwayFromZero({5, 3}, 4);
  const Tensor<double> pos = Uniform({5, 3}, 4, 0.2, 2.0);
  c.push_back(Unary("relu", [](Var<double> v) { return ops::Relu(v); }, x));
  c.push_back(Unary("tanh", [](Var<double> v) { return ops::Tanh(v); }, x));
  c.push_back(Unary("sigmoid", [](Var<double> v) { return ops::Sigmoid(v); }, x));
  c.push_back(Unary("exp", [](Var<double> v) { return ops::Exp(v); }, x));
  c.push_back(Unary("square", [](Var<double> v) { return ops::Square(v); }, x));
  c.push_back(Unary("clamp", [](Var<double> v) {
    return ops::Clamp(v, -0.5, 0.5);
  }, x));
  c.push_back(Unary("log", [](Var<double> v) { return ops::Log(v); }, pos));
  c.push_back(Unary("sqrt", [](Var<double> v) { return ops::Sqrt(v); }, pos));

  c.push_back({"matmul", [](Tape<double>&, const Vars& v) {
                 return Probe(ops::MatMul(v[0], v[1]));
               }, {Uniform({3, 4}, 5), Uniform({4, 2}, 6)}});
  c.push_back({"affine", [](Tape<double>&, const Vars& v) {
                 return Probe(ops::Affine(v[0], v[1], v[2]));
               }, {Uniform({2, 3, 4}, 7), Uniform({4, 5}, 8), Uniform({5}, 9)}});
  c.push_back({"layernorm", [](Tape<double>&, const Vars& v) {
                 return Probe(ops::LayerNorm(v[0], v[1], v[2]));
               }, {Uniform({3, 6}, 10), Uniform({6}, 11, 0.5, 1.5),
                   Uniform({6}, 12)}});
  c.push_back(Unary("l2normalize", [](Var<double> v) {
    return ops::L2Normalize(v);
  }, Uniform({4, 5}, 13)));
  c.push_back({"sum", [](Tape<double>&, const Vars& v) {
                 return ops::Sum(ops::Square(v[0]));
               }, {Uniform({3, 5}, 14)}});
  c.push_back({"mean", [](Tape<double>&, const Vars& v) {
                 return ops::Mean(ops::Square(v[0]));
               }, {Uniform({3, 5}, 15)}});
  c.push_back({"concat", [](Tape<double>&, const Vars& v) {
                 return Probe(ops::Concat<double>({v[0], v[1]}, 1));
               }, {Uniform({2, 3, 2}, 16), Uniform({2, 1, 2}, 17)}});
  c.push_back(Unary("slice", [](Var<double> v) {
    return ops::Slice(v, 1, 1, 2);
  }, Uniform({2, 4, 3}, 18)));
  c.push_back(Unary("reshape", [](Var<double> v) {
    return ops::Reshape(v, {6, 2});
  }, Uniform({2, 3, 2}, 19)));
  c.push_back(Unary("patches", [](Var<double> v) {
    return ops::Patches(v, 4, 2, 1);
  }, Uniform({2, 6, 6, 2}, 20)));
  c.push_back({"attention", [](Tape<double>&, const Vars& v) {
                 return Probe(ops::WindowedAttention(v[0], v[1], v[2], 2, 3, v[3]));
               }, {Uniform({2, 5, 4}, 21), Uniform({2, 5, 4}, 22),
                   Uniform({2, 5, 4}, 23), Uniform({2, 3}, 24)}});

  // Loss terms.
  c.push_back({"recon", [](Tape<double>&, const Vars& v) {
                 return geomloss::ReconLoss(v[0], v[1],
                                            geomloss::ReconReduction::kPixelMean);
               }, {Uniform({2, 3, 4, 4, 3}, 25, 0, 1),
                   Uniform({2, 3, 4, 4, 3}, 26, 0, 1)}});
  c.push_back({"kl", [](Tape<double>&, const Vars& v) {
                 return geomloss::KlLoss(v[0], v[1]);
               }, {Uniform({2, 3, 4}, 27), Uniform({2, 3, 4}, 28)}});
  const Tensor<double> p = UnitRows(3, 4, 5, 29);
  c.push_back({"slow_all_pairs", [](Tape<double>&, const Vars& v) {
                 return geomloss::SlowLoss(v[0], SlowMode::kAllPairs);
               }, {p}});
  c.push_back({"slow_adjacent", [](Tape<double>&, const Vars& v) {
                 return geomloss::SlowLoss(v[0], SlowMode::kAdjacentOnly);
               }, {p}});
  c.push_back({"uniform", [](Tape<double>&, const Vars& v) {
                 return geomloss::UniformLoss(v[0]);
               }, {p}});
  // Regularizers through the projection head and normalization.
  numcore::RandomStream rng(30, "gradcheck/chain");
  Tensor<double> z({2, 4, 3}), w({3, 5}), bias({5});
  for (double& v : z.values()) v = rng.Normal();
  for (double& v : w.values()) v = rng.Normal();
  for (double& v : bias.values()) v = 0.1 * rng.Normal();
  c.push_back({"projection_chain", [](Tape<double>&, const Vars& v) {
                 Var<double> q = ops::L2Normalize(ops::Affine(v[0], v[1], v[2]));
                 return ops::Add(geomloss::SlowLoss(q, SlowMode::kAllPairs),
                                 geomloss::UniformLoss(q));
               }, {z, w, bias}});
  c.push_back({"normalization_chain", [](Tape<double>&, const Vars& v) {
                 Var<double> q = ops::L2Normalize(v[0]);
                 return ops::Add(geomloss::SlowLoss(q, SlowMode::kAdjacentOnly),
                                 geomloss::UniformLoss(q));
               }, {z}});
  return c;
}

std::vector<numcore::GradCheckResult> RunGradChecks(
    const std::vector<GradCheckCase>& cases,
    const numcore::GradCheckOptions& opts) {
  std::vector<numcore::GradCheckResult> out;
  for (const GradCheckCase& c : cases) {
    out.push_back(numcore::CheckInputGradients(c.name, c.fn, c.inputs, opts));
  }
  return out;
}

}  // namespace grwm::cli
