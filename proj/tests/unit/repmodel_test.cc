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

#include <gtest/gtest.h>

#include "grwm/common/errors.h"
#include "grwm/geomloss/losses.h"
#include "grwm/numcore/gradcheck.h"
#include "grwm/numcore/ops.h"
#include "grwm/repmodel/rep_model.h"
#include "grwm/repmodel/trainer.h"

namespace grwm::repmodel {
namespace {

RepConfig Tiny() {
  RepConfig c;
  c.frame_height = c.frame_width = 8;
  c.conv_channels = {4, 4};
  c.feature_width = 8;
  c.agg_blocks = 2;
  c.heads = 2;
  c.window = 3;
  c.latent_dim = 4;
  c.proj_dim = 6;
  c.decoder_hidden = 12;
  return c;
}

template <typename T>
Tensor<T> RandomFrames(Shape shape, uint64_t seed) {
  numcore::RandomStream rng(seed, "repmodel_test/frames");
  Tensor<T> x(std::move(shape));
  for (T& v : x.values()) v = T(rng.Uniform());
  return x;
}

// Evaluation-mode means for a single sequence [L, H, W, 3] -> [L, d].
template <typename T>
Tensor<T> Means(const RepModel<T>& m, const Tensor<T>& frames) {
  Shape s = frames.shape();
  s.insert(s.begin(), 1);
  return m.EncodeMeans(frames.Reshape(s));
}

template <typename T>
std::vector<T> Row(const Tensor<T>& x, int64_t row) {
  const int64_t w = x.dim(-1);
  return std::vector<T>(x.data() + row * w, x.data() + (row + 1) * w);
}

// ---- configuration --------------------------------------------------------

TEST(RepConfigTest, JsonRoundTripDigestAndValidation) {
  RepConfig c = Tiny();
  c.projection = geomloss::ProjectionMode::kWithoutHead;
  EXPECT_EQ(RepConfig::FromJson(c.ToJson()), c);
  EXPECT_EQ(RepConfig::FromJson(c.ToJson()).Digest(), c.Digest());
  RepConfig other = c;
  other.latent_dim = 5;
  EXPECT_NE(other.Digest(), c.Digest());
  EXPECT_THROW(RepConfig::FromJson("[1,2]"), FormatError);

  RepConfig bad = Tiny();
  bad.window = 0;
  EXPECT_THROW(bad.Validate(), ContractViolation);
  bad = Tiny();
  bad.latent_dim = 1;
  EXPECT_THROW(bad.Validate(), ContractViolation);
  bad = Tiny();
  bad.proj_dim = 1;
  EXPECT_THROW(bad.Validate(), ContractViolation);
}

// ---- frame encoder --------------------------------------------------------

TEST(EncoderTest, PureAndShaped) {
  RepModel<float> m(Tiny(), 1);
  Tensor<float> one = RandomFrames<float>({1, 8, 8, 3}, 1);
  Tensor<float> two({2, 8, 8, 3});
  std::copy(one.values().begin(), one.values().end(), two.data());
  std::copy(one.values().begin(), one.values().end(), two.data() + 192);
  numcore::Tape<float> tape;
  const Tensor<float> f = m.EncodeFrames(tape, tape.Constant(two)).value();
  ASSERT_EQ(f.shape(), (Shape{2, 8}));
  EXPECT_EQ(Row(f, 0), Row(f, 1));
}

TEST(EncoderTest, EveryPixelRegionMatters) {
  RepModel<double> m(Tiny(), 2);
  const Tensor<double> base = RandomFrames<double>({1, 8, 8, 3}, 2);
  numcore::Tape<double> tape;
  const Tensor<double> f0 = m.EncodeFrames(tape, tape.Constant(base)).value();
  // Central differences on a spread of single pixels.
  for (int p : {0, 27, 100, 191}) {
    Tensor<double> up = base, down = base;
    up[p] += 1e-4;
    down[p] -= 1e-4;
    numcore::Tape<double> t2;
    const Tensor<double> a = m.EncodeFrames(t2, t2.Constant(up)).value();
    const Tensor<double> b = m.EncodeFrames(t2, t2.Constant(down)).value();
    double change = 0.0;
    for (int64_t i = 0; i < a.size(); ++i) change += std::abs(a[i] - b[i]);
    EXPECT_GT(change / 2e-4, 1e-6) << "pixel " << p;
  }
  EXPECT_TRUE(f0.AllFinite());
}

TEST(EncoderTest, RejectsWrongFrameSize) {
  RepModel<float> m(Tiny(), 1);
  numcore::Tape<float> tape;
  EXPECT_THROW(m.EncodeFrames(tape, tape.Constant(Tensor<float>({1, 6, 8, 3}))),
               ContractViolation);
}

// ---- temporal aggregation -------------------------------------------------

TEST(AggregatorTest, CausalAndWindowedExactly) {
  RepConfig c = Tiny();
  RepModel<float> m(c, 3);
  const int len = 10, k = c.window;
  const Tensor<float> base = RandomFrames<float>({len, 8, 8, 3}, 3);
  const Tensor<float> z = Means(m, base);
  for (int t = 0; t < len; ++t) {
    for (int j = 0; j < len; ++j) {
      if (j <= t && j >= t - k + 1) continue;
      Tensor<float> x = base;
      for (int p = 0; p < 192; ++p) x[j * 192 + p] = 1.0f - x[j * 192 + p];
      ASSERT_EQ(Row(Means(m, x), t), Row(z, t)) << "t=" << t << " j=" << j;
    }
  }
}

TEST(AggregatorTest, FramesInsideTheWindowDoMatter) {
  RepConfig c = Tiny();
  RepModel<float> m(c, 4);
  const Tensor<float> base = RandomFrames<float>({6, 8, 8, 3}, 4);
  const Tensor<float> z = Means(m, base);
  const int t = 5;
  for (int j = t - c.window + 1; j <= t; ++j) {
    Tensor<float> x = base;
    for (int p = 0; p < 192; ++p) x[j * 192 + p] = 1.0f - x[j * 192 + p];
    EXPECT_NE(Row(Means(m, x), t), Row(z, t)) << "j=" << j;
  }
}

TEST(AggregatorTest, UnitWindowIsPerFrame) {
  RepConfig c = Tiny();
  c.window = 1;
  RepModel<float> m(c, 5);
  const Tensor<float> seq = RandomFrames<float>({5, 8, 8, 3}, 5);
  const Tensor<float> z = Means(m, seq);
  for (int t = 0; t < 5; ++t) {
    // Replace every other frame; z_t must not move.
    Tensor<float> x = RandomFrames<float>({5, 8, 8, 3}, 50 + t);
    std::copy(seq.data() + t * 192, seq.data() + (t + 1) * 192,
              x.data() + t * 192);
    EXPECT_EQ(Row(Means(m, x), t), Row(z, t)) << t;
  }
}

// ---- bottleneck -----------------------------------------------------------

TEST(BottleneckTest, EvaluationModeUsesTheMean) {
  RepModel<float> m(Tiny(), 6);
  numcore::Tape<float> tape;
  const Tensor<float> x = RandomFrames<float>({2, 4, 8, 8, 3}, 6);
  const auto out = m.Forward(tape, tape.Constant(x), nullptr);
  EXPECT_EQ(out.latents.z.value(), out.latents.mu.value());
  for (float v : out.latents.logvar.value().values()) {
    EXPECT_GE(v, -10.0f);
    EXPECT_LE(v, 4.0f);
  }
}

TEST(BottleneckTest, SampleVarianceMatchesLogvar) {
  RepModel<double> m(Tiny(), 7);
  const int n = 10000;
  numcore::RandomStream rng(7, "ctx");
  Tensor<double> row({1, 8});
  for (double& v : row.values()) v = rng.Normal();
  Tensor<double> ctx({n, 8});
  for (int i = 0; i < n; ++i) std::copy(row.data(), row.data() + 8, ctx.data() + i * 8);
  Tensor<double> noise({n, 4});
  for (double& v : noise.values()) v = rng.Normal();
  numcore::Tape<double> tape;
  const auto lat = m.Bottleneck(tape, tape.Constant(ctx), &noise);
  const Tensor<double>& mu = lat.mu.value();
  const Tensor<double>& lv = lat.logvar.value();
  const Tensor<double>& z = lat.z.value();
  for (int k = 0; k < 4; ++k) {
    double s2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double e = z[i * 4 + k] - mu[i * 4 + k];
      s2 += e * e;
    }
    EXPECT_NEAR(s2 / n / std::exp(lv[k]), 1.0, 0.05) << k;
  }
}

TEST(BottleneckTest, FloorClampMakesSamplesCollapseToMean) {
  RepConfig c = Tiny();
  c.logvar_min = -40.0;
  c.logvar_max = -30.0;
  RepModel<double> m(c, 8);
  Tensor<double> ctx = RandomFrames<double>({3, 8}, 8);
  Tensor<double> noise({3, 4});
  for (double& v : noise.values()) v = 3.0;
  numcore::Tape<double> tape;
  const auto lat = m.Bottleneck(tape, tape.Constant(ctx), &noise);
  for (int64_t i = 0; i < noise.size(); ++i) {
    EXPECT_NEAR(lat.z.value()[i], lat.mu.value()[i], 1e-6);
  }
}

// ---- decoder and projection -----------------------------------------------

TEST(DecoderTest, PureBoundedAndShaped) {
  RepModel<float> m(Tiny(), 9);
  Tensor<float> z({3, 4});
  numcore::RandomStream rng(9, "z");
  for (float& v : z.values()) v = float(5.0 * rng.Normal());
  std::copy(z.data(), z.data() + 4, z.data() + 8);
  const Tensor<float> img = m.DecodeLatents(z);
  ASSERT_EQ(img.shape(), (Shape{3, 8, 8, 3}));
  for (float v : img.values()) {
    EXPECT_GE(v, 0.0f);
    EXPECT_LE(v, 1.0f);
  }
  EXPECT_EQ(Row(img.Reshape({3, 192}), 0), Row(img.Reshape({3, 192}), 2));
}

TEST(ProjectionTest, RowsLieOnTheSphere) {
  for (auto mode : {geomloss::ProjectionMode::kWithHead,
                    geomloss::ProjectionMode::kWithoutHead}) {
    RepConfig c = Tiny();
    c.projection = mode;
    RepModel<float> m(c, 10);
    numcore::Tape<float> tape;
    const Tensor<float> x = RandomFrames<float>({2, 5, 8, 8, 3}, 10);
    const auto out = m.Forward(tape, tape.Constant(x), nullptr);
    const Tensor<float>& p = out.embeddings.value();
    const int64_t w = p.dim(-1);
    EXPECT_EQ(w, mode == geomloss::ProjectionMode::kWithHead ? 6 : 4);
    for (int64_t r = 0; r < p.size() / w; ++r) {
      double n2 = 0.0;
      for (int64_t j = 0; j < w; ++j) n2 += double(p[r * w + j]) * p[r * w + j];
      EXPECT_NEAR(std::sqrt(n2), 1.0, 1e-5);
    }
  }
}

TEST(ProjectionTest, ScalingLatentsLeavesEmbeddingsUnchanged) {
  RepConfig c = Tiny();
  c.proj_dim = c.latent_dim;
  RepModel<double> with(c, 11);
  // Identity head.
  auto* w = with.params().Find("proj.w");
  ASSERT_NE(w, nullptr);
  for (int64_t i = 0; i < w->value.size(); ++i) w->value[i] = i % 5 == 0;
  for (double& v : with.params().Find("proj.b")->value.values()) v = 0.0;
  c.projection = geomloss::ProjectionMode::kWithoutHead;
  RepModel<double> without(c, 11);

  const Tensor<double> z = RandomFrames<double>({2, 3, 4}, 11);
  Tensor<double> z5 = z;
  for (double& v : z5.values()) v *= 5.0;
  for (RepModel<double>* m : {&with, &without}) {
    numcore::Tape<double> tape;
    const Tensor<double> a = m->Project(tape, tape.Constant(z)).value();
    const Tensor<double> b = m->Project(tape, tape.Constant(z5)).value();
    for (int64_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
  }
  // Without the head the embedding is the normalized latent itself.
  numcore::Tape<double> tape;
  const Tensor<double> p = without.Project(tape, tape.Constant(z)).value();
  for (int r = 0; r < 6; ++r) {
    double n = 0.0;
    for (int j = 0; j < 4; ++j) n += z[r * 4 + j] * z[r * 4 + j];
    for (int j = 0; j < 4; ++j) {
      EXPECT_NEAR(p[r * 4 + j], z[r * 4 + j] / std::sqrt(n), 1e-12);
    }
  }
}

// ---- end-to-end gradients -------------------------------------------------

TEST(EndToEndTest, TotalObjectiveMatchesFiniteDifferences) {
  for (auto mode : {geomloss::ProjectionMode::kWithHead,
                    geomloss::ProjectionMode::kWithoutHead}) {
    RepConfig c = Tiny();
    c.projection = mode;
    RepModel<double> m(c, 12);
    const Tensor<double> frames = RandomFrames<double>({2, 4, 8, 8, 3}, 12);
    geomloss::LossConfig lc;
    lc.beta = 0.01;
    lc.lambda_slow = 0.5;
    lc.lambda_uniform = 0.3;
    lc.projection = mode;
    auto f = [&](numcore::Tape<double>& tape) {
      numcore::RandomStream noise(5, "e2e_noise");
      auto x = tape.Constant(frames);
      auto out = m.Forward(tape, x, &noise);
      return geomloss::TotalLoss(out.recon, x, out.latents.mu,
                                 out.latents.logvar, out.embeddings, lc,
                                 nullptr);
    };
    numcore::GradCheckOptions opts;
    opts.tolerance = 1e-5;
    const auto r = numcore::CheckParamGradients("rep_total", f, m.params(), opts);
    EXPECT_TRUE(r.passed) << r.worst << " rel " << r.max_rel_error;
    EXPECT_GT(r.entries_checked, 500);
  }
}

// ---- training -------------------------------------------------------------

TEST(TrainingTest, ReconstructionDropsBelowTarget) {
  mazeworld::EnvConfig env;
  env.frame_height = env.frame_width = 16;
  trajectories::CollectConfig cc;
  cc.count = 40;
  cc.length = 64;
  const auto ds = trajectories::CollectDataset({}, env, cc);
  RepConfig c;
  c.frame_height = c.frame_width = 16;
  c.conv_channels = {16, 32};
  RepModel<float> m(c, 1);
  geomloss::LossConfig vanilla;
  vanilla.beta = vanilla.lambda_slow = vanilla.lambda_uniform = 0.0;
  AeTrainConfig tc;
  tc.steps = 1200;
  tc.lr = 1e-3;
  std::vector<int> train(40);
  for (int i = 0; i < 40; ++i) train[i] = i;
  const auto log = TrainAutoencoder(m, ds, train, vanilla, tc);
  ASSERT_EQ(log.size(), 1200u);
  const auto r = EvaluateLosses(m, ds, train, 16, vanilla);
  EXPECT_LT(r.recon, 0.01);
  EXPECT_EQ(r.total, r.recon);
}

}  // namespace
}  // namespace grwm::repmodel
