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

#include "grwm/latdyn/dynamics.h"

#include <algorithm>
#include <cmath>

#include "grwm/common/errors.h"
#include "grwm/numcore/layers.h"
#include "grwm/numcore/ops.h"
#include "grwm/numcore/optim.h"
#include "json.hpp"

namespace grwm::latdyn {
namespace {

namespace ops = numcore::ops;
using numcore::Apply;
using numcore::Tape;
using numcore::Var;

constexpr double kReluGain = 1.4142135623730951;
constexpr float kMinStd = 1e-4f;

}  // namespace

const char* BackendName(Backend b) {
  switch (b) {
    case Backend::kRegressor:
      return "regressor";
    case Backend::kDiffusion:
      return "diffusion";
    case Backend::kOracle:
      return "oracle";
  }
  return "?";
}

Backend ParseBackend(const std::string& name) {
  if (name == "regressor") return Backend::kRegressor;
  if (name == "diffusion") return Backend::kDiffusion;
  if (name == "oracle") return Backend::kOracle;
  throw FormatError(FormatErrorKind::kMalformed, "unknown backend " + name);
}

void DynConfig::Validate() const {
  GRWM_REQUIRE(context >= 1, "context m must be >= 1");
  GRWM_REQUIRE(width >= 1 && blocks >= 0, "bad network size");
  GRWM_REQUIRE(diffusion_steps >= 2, "need at least two diffusion steps");
  GRWM_REQUIRE(sampler_steps >= 1 && sampler_steps <= diffusion_steps,
               "sampler steps must be in [1, T_d]");
  GRWM_REQUIRE(eta >= 0.0, "eta must be non-negative");
  GRWM_REQUIRE(snr_gamma > 0.0 && shift > 0.0 && noise_clip > 0.0,
               "gamma, shift and noise clip must be positive");
  GRWM_REQUIRE(weight_decay_ema >= 0.0 && weight_decay_ema < 1.0,
               "weight smoothing decay in [0, 1)");
  GRWM_REQUIRE(time_embed >= 2 && time_embed % 2 == 0,
               "time embedding width must be even");
}

std::string DynConfig::ToJson() const {
  nlohmann::ordered_json j;
  j["backend"] = BackendName(backend);
  j["context"] = context;
  j["width"] = width;
  j["blocks"] = blocks;
  j["diffusion_steps"] = diffusion_steps;
  j["shift"] = shift;
  j["noise_clip"] = noise_clip;
  j["snr_gamma"] = snr_gamma;
  j["weight_decay_ema"] = weight_decay_ema;
  j["sampler_steps"] = sampler_steps;
  j["eta"] = eta;
  j["time_embed"] = time_embed;
  return j.dump(2);
}

DynConfig DynConfig::FromJson(const std::string& text) {
  DynConfig c;
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    c.backend = ParseBackend(j.at("backend"));
    c.context = j.at("context");
    c.width = j.at("width");
    c.blocks = j.at("blocks");
    c.diffusion_steps = j.at("diffusion_steps");
    c.shift = j.at("shift");
    c.noise_clip = j.at("noise_clip");
    c.snr_gamma = j.at("snr_gamma");
    c.weight_decay_ema = j.at("weight_decay_ema");
    c.sampler_steps = j.at("sampler_steps");
    c.eta = j.at("eta");
    c.time_embed = j.at("time_embed");
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(FormatErrorKind::kMalformed,
                      std::string("dynamics config: ") + e.what());
  }
  c.Validate();
  return c;
}

DynModel::DynModel(const DynConfig& cfg, int state_dim, uint64_t seed)
    : cfg_(cfg), state_dim_(state_dim) {
  cfg_.Validate();
  GRWM_REQUIRE(state_dim >= 1, "state dimension must be positive");
  schedule_ = BuildSchedule(cfg_.diffusion_steps, cfg_.shift, cfg_.noise_clip);
  level_weights_ =
      MinSnrWeights(schedule_, cfg_.snr_gamma, cfg_.weight_decay_ema);
  state_mean_ = stats_.Add("state_mean", {state_dim}, 0.0f);
  state_std_ = stats_.Add("state_std", {state_dim}, 1.0f);
  delta_mean_ = stats_.Add("delta_mean", {state_dim}, 0.0f);
  delta_std_ = stats_.Add("delta_std", {state_dim}, 1.0f);

  numcore::RandomStream rng(seed, "latdyn/init");
  int64_t in = int64_t(cfg_.context) * state_dim + mazeworld::kNumActions;
  if (cfg_.backend == Backend::kDiffusion) in += state_dim + cfg_.time_embed;
  const int w = cfg_.width;
  in_ = numcore::Linear<float>::Create(params_, "in", in, w, rng);
  for (int b = 0; b < cfg_.blocks; ++b) {
    const std::string n = "block" + std::to_string(b);
    norms_.push_back(numcore::LayerNormParams<float>::Create(params_, n + ".ln", w));
    fc1_.push_back(numcore::Linear<float>::Create(params_, n + ".fc1", w, w,
                                                  rng, true, kReluGain));
    fc2_.push_back(numcore::Linear<float>::Create(params_, n + ".fc2", w, w,
                                                  rng, true, 0.5));
  }
  out_norm_ = numcore::LayerNormParams<float>::Create(params_, "out.ln", w);
  out_ = numcore::Linear<float>::Create(params_, "out", w, state_dim, rng,
                                        true, 0.1);
}

void DynModel::set_level_weights(std::vector<double> w) {
  GRWM_REQUIRE(static_cast<int>(w.size()) == schedule_.steps + 1,
               "one weight per noise level");
  for (double x : w) GRWM_REQUIRE(x >= 0.0, "weights must be non-negative");
  level_weights_ = std::move(w);
}

void DynModel::set_sampler(int steps, double eta) {
  DynConfig c = cfg_;
  c.sampler_steps = steps;
  c.eta = eta;
  c.Validate();
  cfg_ = c;
}

void DynModel::FitStatistics(const std::vector<Sequence>& train) {
  const int d = state_dim_;
  std::vector<double> s1(d), s2(d), d1(d), d2(d);
  int64_t ns = 0, nd = 0;
  for (const Sequence& seq : train) {
    GRWM_REQUIRE(seq.states.dim(1) == d, "state width mismatch");
    const int64_t t_len = seq.states.dim(0);
    const float* x = seq.states.data();
    for (int64_t t = 0; t < t_len; ++t) {
      for (int k = 0; k < d; ++k) {
        const double v = x[t * d + k];
        s1[k] += v;
        s2[k] += v * v;
        if (t + 1 < t_len) {
          const double dv = double(x[(t + 1) * d + k]) - v;
          d1[k] += dv;
          d2[k] += dv * dv;
        }
      }
      ++ns;
      if (t + 1 < t_len) ++nd;
    }
  }
  GRWM_REQUIRE(ns > 0 && nd > 0, "no training states");
  for (int k = 0; k < d; ++k) {
    const double m = s1[k] / ns, dm = d1[k] / nd;
    state_mean_->value[k] = float(m);
    state_std_->value[k] = std::max(
        kMinStd, float(std::sqrt(std::max(0.0, s2[k] / ns - m * m))));
    delta_mean_->value[k] = float(dm);
    delta_std_->value[k] = std::max(
        kMinStd, float(std::sqrt(std::max(0.0, d2[k] / nd - dm * dm))));
  }
}

Tensor<float> DynModel::Conditioning(
    const float* context, int n,
    const std::vector<mazeworld::Action>& actions) const {
  const int d = state_dim_, m = cfg_.context;
  const int64_t width = int64_t(m) * d + mazeworld::kNumActions;
  Tensor<float> out({n, width});
  for (int i = 0; i < n; ++i) {
    float* row = out.data() + i * width;
    const float* ctx = context + int64_t(i) * m * d;
    for (int j = 0; j < m * d; ++j) {
      const int k = j % d;
      row[j] = (ctx[j] - state_mean_->value[k]) / state_std_->value[k];
    }
    row[m * d + static_cast<int>(actions[i])] = 1.0f;
  }
  return out;
}

Tensor<float> DynModel::TimeEmbedding(const std::vector<int>& t) const {
  const int half = cfg_.time_embed / 2;
  Tensor<float> out({int64_t(t.size()), cfg_.time_embed});
  for (size_t i = 0; i < t.size(); ++i) {
    const double pos = 1000.0 * t[i] / cfg_.diffusion_steps;
    for (int k = 0; k < half; ++k) {
      const double freq = std::exp(-std::log(10000.0) * k / half);
      out[i * cfg_.time_embed + k] = float(std::sin(pos * freq));
      out[i * cfg_.time_embed + half + k] = float(std::cos(pos * freq));
    }
  }
  return out;
}

Var<float> DynModel::Network(Tape<float>& tape, Var<float> input) const {
  Var<float> h = Apply(tape, in_, input);
  for (size_t b = 0; b < fc1_.size(); ++b) {
    Var<float> u = ops::Relu(Apply(tape, fc1_[b], Apply(tape, norms_[b], h)));
    h = ops::Add(h, Apply(tape, fc2_[b], u));
  }
  return Apply(tape, out_, Apply(tape, out_norm_, h));
}

double DynModel::Loss(const std::vector<Sequence>& data,
                      const std::vector<std::pair<int, int>>& samples,
                      numcore::RandomStream& rng) {
  const int d = state_dim_, m = cfg_.context;
  const int n = static_cast<int>(samples.size());
  GRWM_REQUIRE(n >= 1, "empty batch");
  std::vector<float> ctx(size_t(n) * m * d);
  std::vector<mazeworld::Action> acts(n);
  Tensor<float> target({n, d});
  for (int i = 0; i < n; ++i) {
    const auto [traj, t] = samples[i];
    const Sequence& seq = data[traj];
    GRWM_REQUIRE((seq.kind == SequenceKind::kOracleState) ==
                     (cfg_.backend == Backend::kOracle),
                 cfg_.backend == Backend::kOracle
                     ? "oracle backend trains on oracle states, not latents"
                     : "latent backends train on latents, not oracle states");
    GRWM_REQUIRE(t - m + 1 >= 0 && t + 1 < seq.states.dim(0),
                 "sample position out of range");
    const float* x = seq.states.data();
    std::copy(x + int64_t(t - m + 1) * d, x + int64_t(t + 1) * d,
              ctx.begin() + int64_t(i) * m * d);
    acts[i] = seq.actions[t];
    for (int k = 0; k < d; ++k) {
      target[i * d + k] =
          (x[(t + 1) * d + k] - x[t * d + k] - delta_mean_->value[k]) /
          delta_std_->value[k];
    }
  }
  Tape<float> tape;
  Var<float> cond = tape.Constant(Conditioning(ctx.data(), n, acts));
  Var<float> loss;
  if (cfg_.backend != Backend::kDiffusion) {
    Var<float> pred = Network(tape, cond);
    loss = ops::Mean(ops::Square(ops::Sub(pred, tape.Constant(target))));
  } else {
    std::vector<int> levels(n);
    Tensor<double> eps({n, d}), z0({n, d});
    for (int i = 0; i < n; ++i) {
      levels[i] = 1 + static_cast<int>(rng.UniformInt(schedule_.steps));
    }
    for (int64_t k = 0; k < eps.size(); ++k) {
      eps[k] = rng.Normal();
      z0[k] = target[k];
    }
    Tensor<float> xt({n, d}), v({n, d}), w({n, d});
    for (int i = 0; i < n; ++i) {
      const double a = schedule_.alpha_bar[levels[i]];
      const double sa = std::sqrt(a), sb = std::sqrt(1.0 - a);
      const double wi = level_weights_[levels[i]] / (double(n) * d);
      for (int k = 0; k < d; ++k) {
        const int64_t j = int64_t(i) * d + k;
        xt[j] = float(sa * z0[j] + sb * eps[j]);
        v[j] = float(sa * eps[j] - sb * z0[j]);
        w[j] = float(wi);
      }
    }
    Var<float> input = ops::Concat<float>(
        {cond, tape.Constant(std::move(xt)), tape.Constant(TimeEmbedding(levels))},
        1);
    Var<float> err = ops::Square(ops::Sub(Network(tape, input),
                                          tape.Constant(std::move(v))));
    loss = ops::Sum(ops::Mul(err, tape.Constant(std::move(w))));
  }
  tape.Backward(loss);
  return loss.value().item();
}

Tensor<float> DynModel::Predict(const Tensor<float>& context,
                                const std::vector<mazeworld::Action>& actions,
                                numcore::RandomStream* rng) const {
  const int d = state_dim_, m = cfg_.context;
  GRWM_REQUIRE(context.rank() == 3 && context.dim(1) == m &&
                   context.dim(2) == d,
               "context must be [N, " + std::to_string(m) + ", " +
                   std::to_string(d) + "]");
  const int n = static_cast<int>(context.dim(0));
  GRWM_REQUIRE(static_cast<int>(actions.size()) == n, "one action per row");
  const Tensor<float> cond = Conditioning(context.data(), n, actions);
  Tensor<float> delta;
  if (cfg_.backend != Backend::kDiffusion) {
    Tape<float> tape;
    delta = Network(tape, tape.Constant(cond)).value();
  } else {
    GRWM_REQUIRE(rng != nullptr, "diffusion sampling needs a noise stream");
    Tensor<double> noise({n, d});
    for (double& e : noise.values()) e = rng->Normal();
    VelocityFn velocity = [&](const Tensor<double>& x, int t) {
      Tape<float> tape;
      Var<float> input = ops::Concat<float>(
          {tape.Constant(cond), tape.Constant(x.Cast<float>()),
           tape.Constant(TimeEmbedding(std::vector<int>(n, t)))},
          1);
      return Network(tape, input).value().Cast<double>();
    };
    delta = DdimSample(schedule_, cfg_.sampler_steps, cfg_.eta,
                       std::move(noise), velocity, rng)
                .Cast<float>();
  }
  Tensor<float> next({n, d});
  for (int i = 0; i < n; ++i) {
    const float* last = context.data() + (int64_t(i) * m + m - 1) * d;
    for (int k = 0; k < d; ++k) {
      next[i * d + k] = last[k] + delta[i * d + k] * delta_std_->value[k] +
                        delta_mean_->value[k];
    }
    if (cfg_.backend == Backend::kOracle) {
      float* s = next.data() + i * d;
      s[0] = std::clamp(s[0], -1.0f, 1.0f);
      s[1] = std::clamp(s[1], -1.0f, 1.0f);
      const float r = std::sqrt(s[2] * s[2] + s[3] * s[3]);
      if (r > 0.0f) {
        s[2] /= r;
        s[3] /= r;
      } else {
        s[2] = 0.0f;
        s[3] = 1.0f;
      }
    }
  }
  return next;
}

std::vector<numcore::NamedArray> DynModel::Export() const {
  std::vector<numcore::NamedArray> out = params_.Export("dyn/");
  for (numcore::NamedArray& a : stats_.Export("dyn_stats/")) {
    out.push_back(std::move(a));
  }
  return out;
}

void DynModel::Import(const std::vector<numcore::NamedArray>& arrays) {
  params_.Import(arrays, "dyn/");
  stats_.Import(arrays, "dyn_stats/");
}

std::vector<std::pair<int, int>> SamplePositions(
    const std::vector<Sequence>& data, int context) {
  std::vector<std::pair<int, int>> pos;
  for (size_t i = 0; i < data.size(); ++i) {
    const int t_len = static_cast<int>(data[i].states.dim(0));
    for (int t = context - 1; t + 1 < t_len; ++t) {
      pos.push_back({static_cast<int>(i), t});
    }
  }
  return pos;
}

std::vector<double> TrainDynamics(
    DynModel& model, const std::vector<Sequence>& train,
    const DynTrainConfig& cfg,
    const std::function<void(int64_t, double, double)>& on_step) {
  GRWM_REQUIRE(cfg.steps >= 1 && cfg.batch >= 1, "need steps and batch >= 1");
  const auto positions = SamplePositions(train, model.config().context);
  GRWM_REQUIRE(!positions.empty(), "sequences shorter than the context");
  model.FitStatistics(train);
  numcore::Adam<float> adam({0.9, 0.999, 1e-8, cfg.weight_decay});
  const numcore::LRSchedule schedule(
      cfg.lr, std::min(cfg.warmup, cfg.steps), cfg.steps, cfg.min_ratio);
  std::vector<double> losses;
  losses.reserve(cfg.steps);
  std::vector<std::pair<int, int>> batch(cfg.batch);
  for (int step = 1; step <= cfg.steps; ++step) {
    numcore::RandomStream rng(cfg.seed, "latdyn/batch", step);
    for (auto& b : batch) b = positions[rng.UniformInt(positions.size())];
    numcore::RandomStream noise(cfg.seed, "latdyn/noise", step);
    model.params().ZeroGrad();
    const double loss = model.Loss(train, batch, noise);
    const double lr = schedule.Rate(step);
    adam.Step(model.params(), lr);
    losses.push_back(loss);
    if (on_step) on_step(step, lr, loss);
  }
  return losses;
}

Sequence OracleSequence(const std::vector<mazeworld::Pose>& poses,
                        const std::vector<mazeworld::Action>& actions,
                        const mazeworld::MazeMap& map) {
  GRWM_REQUIRE(poses.size() == actions.size(), "poses/actions length differ");
  Sequence s;
  s.kind = SequenceKind::kOracleState;
  s.actions = actions;
  s.states = Tensor<float>({int64_t(poses.size()), 4});
  for (size_t t = 0; t < poses.size(); ++t) {
    const auto st = mazeworld::OracleState(poses[t], map);
    for (int k = 0; k < 4; ++k) s.states[t * 4 + k] = float(st[k]);
  }
  return s;
}

}  // namespace grwm::latdyn
