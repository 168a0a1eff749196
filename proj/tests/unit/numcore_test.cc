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

#include <cmath>
#include <cstdio>
#include <set>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "grwm/numcore/checkpoint.h"
#include "grwm/numcore/gradcheck.h"
#include "grwm/numcore/layers.h"
#include "grwm/numcore/ops.h"
#include "grwm/numcore/optim.h"
#include "grwm/numcore/rng.h"

namespace grwm::numcore {
namespace {

using Vars = std::vector<Var<double>>;

Tensor<double> RandomTensor(Shape shape, uint64_t seed, double lo = -1.0,
                            double hi = 1.0) {
  RandomStream rng(seed, "test/tensor");
  Tensor<double> t(std::move(shape));
  for (double& v : t.values()) v = lo + (hi - lo) * rng.Uniform();
  return t;
}

// Weighted sum with fixed random weights, so every output element reaches
// the objective with a distinct coefficient.
Var<double> Probe(Var<double> y, uint64_t seed = 99) {
  Tensor<double> w = RandomTensor(y.shape(), seed);
  return ops::Sum(ops::Mul(y, y.tape->Constant(w)));
}

void ExpectGradOk(const std::string& name, const ScalarFn& f,
                  std::vector<Tensor<double>> inputs) {
  GradCheckResult r = CheckInputGradients(name, f, std::move(inputs));
  EXPECT_TRUE(r.passed) << name << " rel err " << r.max_rel_error << " at "
                        << r.worst;
  EXPECT_GT(r.entries_checked, 0);
}

TEST(TapeTest, SumOfSquares) {
  Tape<double> tape;
  Var<double> x = tape.Variable(Tensor<double>({2}, std::vector<double>{1, 2}));
  Var<double> y = ops::Sum(ops::Square(x));
  EXPECT_DOUBLE_EQ(y.value().item(), 5.0);
  tape.Backward(y);
  EXPECT_DOUBLE_EQ(tape.grad(x.id)[0], 2.0);
  EXPECT_DOUBLE_EQ(tape.grad(x.id)[1], 4.0);
}

TEST(TapeTest, SumGivesOnes) {
  Tape<double> tape;
  Var<double> x = tape.Variable(RandomTensor({3, 4}, 5));
  tape.Backward(ops::Sum(x));
  for (double g : tape.grad(x.id).values()) EXPECT_EQ(g, 1.0);
}

TEST(TapeTest, NonScalarObjectiveRejected) {
  Tape<double> tape;
  Var<double> x = tape.Variable(RandomTensor({3}, 5));
  EXPECT_THROW(tape.Backward(ops::Square(x)), ContractViolation);
}

TEST(TapeTest, NonFiniteNamesPrimitive) {
  Tape<double> tape;
  Var<double> x = tape.Variable(Tensor<double>({1}, std::vector<double>{-1}));
  try {
    ops::Log(x);
    FAIL() << "expected NumericFailure";
  } catch (const NumericFailure& e) {
    EXPECT_EQ(e.op(), "log");
  }
}

TEST(TapeTest, ParameterGradientsAccumulate) {
  ParamSet<double> ps;
  Parameter<double>* p = ps.Add("p", {2}, 3.0);
  for (int rep = 0; rep < 2; ++rep) {
    Tape<double> tape;
    tape.Backward(ops::Sum(ops::Square(tape.Param(*p))));
  }
  EXPECT_DOUBLE_EQ(p->grad[0], 12.0);
}

TEST(TapeTest, RandomThreeLayerMapMatchesFiniteDifferences) {
  // 12 scalars: [1,2]x[2,2] + [2] -> tanh -> [2,2] + [2] -> sum of squares.
  ParamSet<double> ps;
  RandomStream rng(3, "test/mlp");
  Linear<double> a = Linear<double>::Create(ps, "a", 2, 2, rng);
  Linear<double> b = Linear<double>::Create(ps, "b", 2, 2, rng);
  for (Parameter<double>& p : ps.all()) {
    for (double& v : p.value.values()) v = 2.0 * rng.Uniform() - 1.0;
  }
  ASSERT_EQ(ps.NumScalars(), 12);
  Tensor<double> x = RandomTensor({1, 2}, 17);
  GradCheckResult r = CheckParamGradients(
      "mlp",
      [&](Tape<double>& t) {
        Var<double> h = ops::Tanh(Apply(t, a, t.Constant(x)));
        h = ops::Sigmoid(Apply(t, b, h));
        return ops::Sum(ops::Square(h));
      },
      ps);
  EXPECT_TRUE(r.passed) << r.max_rel_error << " " << r.worst;
  EXPECT_EQ(r.entries_checked, 12);
}

TEST(GradCheckTest, Elementwise) {
  ExpectGradOk("add", [](Tape<double>&, const Vars& v) {
    return Probe(ops::Add(v[0], v[1]));
  }, {RandomTensor({3, 2}, 1), RandomTensor({3, 2}, 2)});
  ExpectGradOk("sub", [](Tape<double>&, const Vars& v) {
    return Probe(ops::Sub(v[0], v[1]));
  }, {RandomTensor({3, 2}, 1), RandomTensor({3, 2}, 2)});
  ExpectGradOk("mul", [](Tape<double>&, const Vars& v) {
    return Probe(ops::Mul(v[0], v[1]));
  }, {RandomTensor({3, 2}, 1), RandomTensor({3, 2}, 2)});
  ExpectGradOk("scale", [](Tape<double>&, const Vars& v) {
    return Probe(ops::AddScalar(ops::Scale(v[0], -1.7), 0.3));
  }, {RandomTensor({4}, 1)});
}

TEST(GradCheckTest, Pointwise) {
  // Keep inputs away from the relu/clamp kinks.
  Tensor<double> x = RandomTensor({5, 3}, 4);
  for (double& v : x.values()) v += v > 0 ? 0.05 : -0.05;
  auto one = [&](const char* name, auto op) {
    ExpectGradOk(name, [op](Tape<double>&, const Vars& v) {
      return Probe(op(v[0]));
    }, {x});
  };
  one("relu", [](Var<double> v) { return ops::Relu(v); });
  one("tanh", [](Var<double> v) { return ops::Tanh(v); });
  one("sigmoid", [](Var<double> v) { return ops::Sigmoid(v); });
  one("exp", [](Var<double> v) { return ops::Exp(v); });
  one("square", [](Var<double> v) { return ops::Square(v); });
  one("clamp", [](Var<double> v) { return ops::Clamp(v, -0.5, 0.5); });
  Tensor<double> pos = RandomTensor({5, 3}, 4, 0.2, 2.0);
  ExpectGradOk("log", [](Tape<double>&, const Vars& v) {
    return Probe(ops::Log(v[0]));
  }, {pos});
  ExpectGradOk("sqrt", [](Tape<double>&, const Vars& v) {
    return Probe(ops::Sqrt(v[0]));
  }, {pos});
}

TEST(GradCheckTest, LinearAlgebra) {
  ExpectGradOk("matmul", [](Tape<double>&, const Vars& v) {
    return Probe(ops::MatMul(v[0], v[1]));
  }, {RandomTensor({3, 4}, 1), RandomTensor({4, 2}, 2)});
  ExpectGradOk("affine", [](Tape<double>&, const Vars& v) {
    return Probe(ops::Affine(v[0], v[1], v[2]));
  }, {RandomTensor({2, 3, 4}, 1), RandomTensor({4, 5}, 2),
      RandomTensor({5}, 3)});
  ExpectGradOk("affine_nobias", [](Tape<double>&, const Vars& v) {
    return Probe(ops::Affine(v[0], v[1], Var<double>{}));
  }, {RandomTensor({3, 4}, 1), RandomTensor({4, 2}, 2)});
}

TEST(GradCheckTest, Normalization) {
  ExpectGradOk("layernorm", [](Tape<double>&, const Vars& v) {
    return Probe(ops::LayerNorm(v[0], v[1], v[2]));
  }, {RandomTensor({3, 6}, 1), RandomTensor({6}, 2, 0.5, 1.5),
      RandomTensor({6}, 3)});
  ExpectGradOk("l2normalize", [](Tape<double>&, const Vars& v) {
    return Probe(ops::L2Normalize(v[0]));
  }, {RandomTensor({4, 5}, 1)});
}

TEST(GradCheckTest, ReductionsAndShape) {
  ExpectGradOk("mean", [](Tape<double>&, const Vars& v) {
    return ops::Mean(ops::Square(v[0]));
  }, {RandomTensor({3, 5}, 1)});
  ExpectGradOk("concat", [](Tape<double>&, const Vars& v) {
    return Probe(ops::Concat<double>({v[0], v[1]}, 1));
  }, {RandomTensor({2, 3, 2}, 1), RandomTensor({2, 1, 2}, 2)});
  ExpectGradOk("slice", [](Tape<double>&, const Vars& v) {
    return Probe(ops::Slice(v[0], 1, 1, 2));
  }, {RandomTensor({2, 4, 3}, 1)});
  ExpectGradOk("reshape", [](Tape<double>&, const Vars& v) {
    return Probe(ops::Reshape(v[0], {6, 2}));
  }, {RandomTensor({2, 3, 2}, 1)});
}

TEST(GradCheckTest, Patches) {
  ExpectGradOk("patches", [](Tape<double>&, const Vars& v) {
    return Probe(ops::Patches(v[0], 4, 2, 1));
  }, {RandomTensor({2, 6, 6, 2}, 1)});
}

TEST(GradCheckTest, WindowedAttention) {
  ExpectGradOk("attention", [](Tape<double>&, const Vars& v) {
    return Probe(ops::WindowedAttention(v[0], v[1], v[2], 2, 3, v[3]));
  }, {RandomTensor({2, 5, 4}, 1), RandomTensor({2, 5, 4}, 2),
      RandomTensor({2, 5, 4}, 3), RandomTensor({2, 3}, 4)});
}

TEST(GradCheckTest, CorruptedGradientIsDetected) {
  // Wrong derivative on purpose: d/dx x^2 reported as x.
  ScalarFn f = [](Tape<double>& tape, const Vars& v) {
    Var<double> x = v[0];
    Tensor<double> y = x.value();
    for (double& e : y.values()) e *= e;
    Var<double> out = tape.Record("bad_square", y, {x.id},
                                  [x](Tape<double>& t, int self) {
      const Tensor<double>& g = t.grad(self);
      Tensor<double>& gx = t.grad(x.id);
      for (int64_t i = 0; i < g.size(); ++i) gx[i] += g[i] * x.value()[i];
    });
    return ops::Sum(out);
  };
  GradCheckResult r = CheckInputGradients("bad", f, {RandomTensor({4}, 1)});
  EXPECT_FALSE(r.passed);
  EXPECT_GT(r.max_rel_error, 0.1);
}

TEST(AttentionTest, CausalAndWindowedExactly) {
  Tensor<double> x = RandomTensor({1, 6, 4}, 7);
  auto run = [](const Tensor<double>& in) {
    Tape<double> tape;
    Var<double> v = tape.Constant(in);
    return ops::WindowedAttention(v, v, v, 2, 3, Var<double>{}).value();
  };
  Tensor<double> base = run(x);
  const int t = 3;
  for (int j : {0, 4, 5}) {  // before the window, and in the future
    Tensor<double> y = x;
    for (int e = 0; e < 4; ++e) y[j * 4 + e] += 1.0;
    Tensor<double> out = run(y);
    for (int e = 0; e < 4; ++e) EXPECT_EQ(out[t * 4 + e], base[t * 4 + e]);
  }
}

TEST(AdamTest, ZeroGradientIsIdentity) {
  ParamSet<double> ps;
  Parameter<double>* p = ps.Add("p", {3}, 0.5);
  Adam<double> adam;
  for (int i = 0; i < 5; ++i) {
    ps.ZeroGrad();
    adam.Step(ps, 1e-3);
  }
  for (double v : p->value.values()) EXPECT_EQ(v, 0.5);
  EXPECT_EQ(adam.state().step, 5);
}

TEST(AdamTest, FirstStepMovesByLearningRate) {
  ParamSet<double> ps;
  Parameter<double>* p = ps.Add("p", {2}, 1.0);
  p->grad[0] = 3.0;
  p->grad[1] = -0.02;
  Adam<double> adam;
  adam.Step(ps, 1e-2);
  // m_hat = g, v_hat = g^2, so the update is lr * g / (|g| + eps).
  EXPECT_NEAR(p->value[0], 1.0 - 1e-2 * 3.0 / (3.0 + 1e-8), 1e-15);
  EXPECT_NEAR(p->value[1], 1.0 + 1e-2 * 0.02 / (0.02 + 1e-8), 1e-15);
}

TEST(AdamTest, TwoStepsFollowRecurrence) {
  ParamSet<double> ps;
  Parameter<double>* p = ps.Add("p", {1}, 0.0);
  Adam<double> adam({0.9, 0.99, 1e-8, 0.0});
  const double g = 0.5, lr = 0.1;
  double w = 0.0, m = 0.0, v = 0.0;
  for (int k = 1; k <= 2; ++k) {
    p->grad[0] = g;
    adam.Step(ps, lr);
    m = 0.9 * m + (1.0 - 0.9) * g;
    v = 0.99 * v + (1.0 - 0.99) * g * g;
    const double mh = m / (1 - std::pow(0.9, k));
    const double vh = v / (1 - std::pow(0.99, k));
    w -= lr * mh / (std::sqrt(vh) + 1e-8);
  }
  EXPECT_EQ(adam.state().step, 2);
  EXPECT_DOUBLE_EQ(adam.state().m[0][0], m);
  EXPECT_DOUBLE_EQ(adam.state().v[0][0], v);
  EXPECT_NEAR(p->value[0], w, 1e-15);
}

TEST(AdamTest, DecoupledWeightDecay) {
  ParamSet<double> ps;
  Parameter<double>* p = ps.Add("p", {1}, 2.0);
  Adam<double> adam({0.9, 0.999, 1e-8, 1e-4});
  ps.ZeroGrad();
  adam.Step(ps, 0.1);
  EXPECT_NEAR(p->value[0], 2.0 - 0.1 * 1e-4 * 2.0, 1e-15);
}

TEST(AdamTest, RejectsNonPositiveRate) {
  ParamSet<double> ps;
  ps.Add("p", {1});
  Adam<double> adam;
  EXPECT_THROW(adam.Step(ps, 0.0), ContractViolation);
}

TEST(LRScheduleTest, Examples) {
  LRSchedule s(5e-4, 1000, 10000, 0.1);
  EXPECT_DOUBLE_EQ(s.Rate(1000), 5e-4);
  EXPECT_DOUBLE_EQ(s.Rate(500), 2.5e-4);
  EXPECT_DOUBLE_EQ(s.Rate(10000), 5e-5);
  EXPECT_DOUBLE_EQ(s.Rate(25000), 5e-5);
  EXPECT_DOUBLE_EQ(s.Rate(0), 0.0);
}

TEST(LRScheduleTest, PiecewiseLinearContinuousBounded) {
  LRSchedule s(1e-3, 100, 1000, 0.1);
  for (int64_t k = 1; k <= 2000; ++k) {
    const double r = s.Rate(k);
    EXPECT_GT(r, 0.0);
    EXPECT_LE(r, 1e-3);
    if (k >= 100) {
      EXPECT_GE(r, 1e-4 - 1e-18);
    }
    // Continuity: neighbouring steps differ by at most one ramp increment.
    EXPECT_LE(std::abs(r - s.Rate(k - 1)), 1e-3 / 100 + 1e-15);
  }
}

TEST(LRScheduleTest, RejectsTotalBelowWarmup) {
  EXPECT_THROW(LRSchedule(1e-3, 100, 50, 0.1), ContractViolation);
}

TEST(RandomStreamTest, Deterministic) {
  RandomStream a(42, "x", 3), b(42, "x", 3), c(42, "y", 3), d(42, "x", 4);
  for (int i = 0; i < 10; ++i) {
    const uint64_t va = a.NextU64();
    EXPECT_EQ(va, b.NextU64());
    EXPECT_NE(va, c.NextU64());
    EXPECT_NE(va, d.NextU64());
  }
}

TEST(RandomStreamTest, ForkDependsOnParent) {
  RandomStream a(1, "a"), b(1, "b");
  EXPECT_NE(a.Fork("c").NextU64(), b.Fork("c").NextU64());
}

TEST(RandomStreamTest, NormalMoments) {
  RandomStream rng(5, "normal");
  double s = 0, s2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = rng.Normal();
    s += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.02);
}

TEST(RandomStreamTest, UniformIntInRange) {
  RandomStream rng(5, "int");
  std::vector<int> counts(7);
  for (int i = 0; i < 70000; ++i) ++counts[rng.UniformInt(7)];
  for (int c : counts) EXPECT_NEAR(c, 10000, 400);
}

TEST(CheckpointTest, RoundTripIsByteExact) {
  ParamSet<float> ps;
  RandomStream rng(1, "ckpt");
  ps.AddUniform("enc.w", {3, 4}, 3, rng);
  ps.Add("enc.b", {4}, 0.25f);
  ps.Add("scalar", {}, -1.5f);
  std::vector<uint8_t> bytes = EncodeCheckpoint(ps.Export());
  std::vector<NamedArray> back = DecodeCheckpoint(bytes);
  EXPECT_EQ(back, ps.Export());
  EXPECT_EQ(EncodeCheckpoint(back), bytes);

  const std::string path = ::testing::TempDir() + "/ckpt.bin";
  WriteCheckpoint(path, ps.Export());
  EXPECT_EQ(ReadFileBytes(path), bytes);
  std::remove(path.c_str());
}

TEST(CheckpointTest, DistinctErrors) {
  ParamSet<float> ps;
  ps.Add("a", {2}, 1.0f);
  std::vector<uint8_t> bytes = EncodeCheckpoint(ps.Export());
  auto kind_of = [](const std::vector<uint8_t>& b) {
    try {
      DecodeCheckpoint(b);
    } catch (const FormatError& e) {
      return e.kind();
    }
    return FormatErrorKind::kIo;
  };
  std::vector<uint8_t> bad = bytes;
  bad[0] = 'X';
  EXPECT_EQ(kind_of(bad), FormatErrorKind::kBadMagic);
  bad = bytes;
  bad[4] = 9;
  EXPECT_EQ(kind_of(bad), FormatErrorKind::kBadVersion);
  bad = bytes;
  bad.resize(bytes.size() - 3);
  EXPECT_EQ(kind_of(bad), FormatErrorKind::kTruncated);
  bad = bytes;
  bad.push_back(0);
  EXPECT_EQ(kind_of(bad), FormatErrorKind::kMalformed);
}

TEST(ParamSetTest, ImportChecksNamesAndShapes) {
  ParamSet<float> a, b, c;
  a.Add("w", {2, 3}, 1.0f);
  b.Add("w", {3, 2});
  c.Add("v", {2, 3});
  EXPECT_THROW(b.Import(a.Export()), FormatError);
  EXPECT_THROW(c.Import(a.Export()), FormatError);
  ParamSet<double> d;
  d.Add("w", {2, 3});
  d.Import(a.Export());
  EXPECT_EQ(d.all()[0].value[5], 1.0);
}

}  // namespace
}  // namespace grwm::numcore
