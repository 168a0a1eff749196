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

#include "grwm/repmodel/rep_model.h"

#include <algorithm>
#include <cmath>

#include "grwm/common/errors.h"
#include "grwm/numcore/layers.h"
#include "grwm/numcore/ops.h"
#include "json.hpp"

namespace grwm::repmodel {
namespace {

namespace ops = numcore::ops;
using numcore::Apply;
using numcore::Linear;
using numcore::LayerNormParams;

constexpr int kKernel = 4;
constexpr int kStride = 2;
constexpr int kPad = 1;
constexpr double kReluGain = 1.4142135623730951;

}  // namespace

void RepConfig::Validate() const {
  GRWM_REQUIRE(frame_height >= 4 && frame_width >= 4 && frame_height <= 64 &&
                   frame_width <= 64,
               "frame dims in [4, 64]");
  GRWM_REQUIRE(!conv_channels.empty(), "need at least one conv stage");
  int h = frame_height, w = frame_width;
  for (int c : conv_channels) {
    GRWM_REQUIRE(c >= 1, "conv channels must be positive");
    h = (h + 2 * kPad - kKernel) / kStride + 1;
    w = (w + 2 * kPad - kKernel) / kStride + 1;
    GRWM_REQUIRE(h >= 1 && w >= 1, "too many conv stages for frame size");
  }
  GRWM_REQUIRE(feature_width >= 2 && agg_blocks >= 0, "bad aggregator size");
  GRWM_REQUIRE(heads >= 1 && feature_width % heads == 0,
               "feature width must divide into heads");
  GRWM_REQUIRE(window >= 1, "window k must be >= 1");
  GRWM_REQUIRE(latent_dim >= 2 && proj_dim >= 2, "d and D must be >= 2");
  GRWM_REQUIRE(decoder_hidden >= 1, "decoder width must be positive");
  GRWM_REQUIRE(logvar_min < logvar_max, "logvar clamp range is empty");
}

std::string RepConfig::ToJson() const {
  nlohmann::ordered_json j;
  j["frame_height"] = frame_height;
  j["frame_width"] = frame_width;
  j["conv_channels"] = conv_channels;
  j["feature_width"] = feature_width;
  j["agg_blocks"] = agg_blocks;
  j["heads"] = heads;
  j["window"] = window;
  j["latent_dim"] = latent_dim;
  j["proj_dim"] = proj_dim;
  j["decoder_hidden"] = decoder_hidden;
  j["projection"] = geomloss::ProjectionModeName(projection);
  j["logvar_min"] = logvar_min;
  j["logvar_max"] = logvar_max;
  return j.dump(2);
}

RepConfig RepConfig::FromJson(const std::string& text) {
  RepConfig c;
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    c.frame_height = j.at("frame_height");
    c.frame_width = j.at("frame_width");
    c.conv_channels = j.at("conv_channels").get<std::vector<int>>();
    c.feature_width = j.at("feature_width");
    c.agg_blocks = j.at("agg_blocks");
    c.heads = j.at("heads");
    c.window = j.at("window");
    c.latent_dim = j.at("latent_dim");
    c.proj_dim = j.at("proj_dim");
    c.decoder_hidden = j.at("decoder_hidden");
    const std::string proj = j.at("projection");
    if (proj == "with_head") {
      c.projection = geomloss::ProjectionMode::kWithHead;
    } else if (proj == "without_head") {
      c.projection = geomloss::ProjectionMode::kWithoutHead;
    } else {
      throw FormatError(FormatErrorKind::kMalformed,
                        "unknown projection mode " + proj);
    }
    c.logvar_min = j.at("logvar_min");
    c.logvar_max = j.at("logvar_max");
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(FormatErrorKind::kMalformed,
                      std::string("representation config: ") + e.what());
  }
  c.Validate();
  return c;
}

uint64_t RepConfig::Digest() const {
  const std::string s = ToJson();
  return numcore::HashLabel(s);
}

template <typename T>
RepModel<T>::RepModel(const RepConfig& cfg, uint64_t seed) : cfg_(cfg) {
  cfg_.Validate();
  numcore::RandomStream rng(seed, "repmodel/init");
  int h = cfg_.frame_height, w = cfg_.frame_width, c = 3;
  for (size_t s = 0; s < cfg_.conv_channels.size(); ++s) {
    conv_.push_back(Linear<T>::Create(params_, "enc.conv" + std::to_string(s),
                                      kKernel * kKernel * c,
                                      cfg_.conv_channels[s], rng, true,
                                      kReluGain));
    c = cfg_.conv_channels[s];
    h = (h + 2 * kPad - kKernel) / kStride + 1;
    w = (w + 2 * kPad - kKernel) / kStride + 1;
  }
  const int f = cfg_.feature_width;
  enc_head_ = Linear<T>::Create(params_, "enc.head", h * w * c, f, rng);
  for (int b = 0; b < cfg_.agg_blocks; ++b) {
    const std::string n = "agg.block" + std::to_string(b);
    Block blk;
    blk.ln1 = LayerNormParams<T>::Create(params_, n + ".ln1", f);
    blk.q = Linear<T>::Create(params_, n + ".q", f, f, rng);
    blk.k = Linear<T>::Create(params_, n + ".k", f, f, rng);
    blk.v = Linear<T>::Create(params_, n + ".v", f, f, rng);
    blk.o = Linear<T>::Create(params_, n + ".o", f, f, rng, true, 0.5);
    blk.rel_bias = params_.Add(n + ".rel_bias", {cfg_.heads, cfg_.window});
    blk.ln2 = LayerNormParams<T>::Create(params_, n + ".ln2", f);
    blk.fc1 = Linear<T>::Create(params_, n + ".fc1", f, 2 * f, rng, true,
                                kReluGain);
    blk.fc2 = Linear<T>::Create(params_, n + ".fc2", 2 * f, f, rng, true, 0.5);
    blocks_.push_back(blk);
  }
  bottleneck_ln_ = LayerNormParams<T>::Create(params_, "bottleneck.ln", f);
  bottleneck_ = Linear<T>::Create(params_, "bottleneck", f,
                                  2 * cfg_.latent_dim, rng);
  dec1_ = Linear<T>::Create(params_, "dec.fc1", cfg_.latent_dim,
                            cfg_.decoder_hidden, rng, true, kReluGain);
  dec2_ = Linear<T>::Create(params_, "dec.fc2", cfg_.decoder_hidden,
                            int64_t(cfg_.frame_height) * cfg_.frame_width * 3,
                            rng);
  if (cfg_.projection == geomloss::ProjectionMode::kWithHead) {
    proj_ = Linear<T>::Create(params_, "proj", cfg_.latent_dim,
                              cfg_.proj_dim, rng);
  }
}

template <typename T>
Var<T> RepModel<T>::EncodeFrames(Tape<T>& tape, Var<T> frames) const {
  GRWM_REQUIRE(frames.value().rank() == 4 &&
                   frames.dim(1) == cfg_.frame_height &&
                   frames.dim(2) == cfg_.frame_width && frames.dim(3) == 3,
               "frames must be [N, " + std::to_string(cfg_.frame_height) +
                   ", " + std::to_string(cfg_.frame_width) + ", 3], got " +
                   numcore::ShapeString(frames.shape()));
  Var<T> x = frames;
  for (const Linear<T>& conv : conv_) {
    x = ops::Relu(Apply(tape, conv, ops::Patches(x, kKernel, kStride, kPad)));
  }
  const int64_t n = x.dim(0);
  x = ops::Reshape(x, {n, x.size() / n});
  return Apply(tape, enc_head_, x);
}

template <typename T>
Var<T> RepModel<T>::RunBlocks(Tape<T>& tape, Var<T> h) const {
  for (const Block& blk : blocks_) {
    Var<T> a = Apply(tape, blk.ln1, h);
    Var<T> att = ops::WindowedAttention(
        Apply(tape, blk.q, a), Apply(tape, blk.k, a), Apply(tape, blk.v, a),
        cfg_.heads, cfg_.window, tape.Param(*blk.rel_bias));
    h = ops::Add(h, Apply(tape, blk.o, att));
    Var<T> m = ops::Relu(Apply(tape, blk.fc1, Apply(tape, blk.ln2, h)));
    h = ops::Add(h, Apply(tape, blk.fc2, m));
  }
  return h;
}

// Stacked windowed layers would widen the receptive field to
// depth*(k-1)+1 frames, so with more than one block every position is
// re-encoded from its own window: full windows are batched together and
// each shorter window at the sequence start forms its own group.
template <typename T>
Var<T> RepModel<T>::Aggregate(Tape<T>& tape, Var<T> features) const {
  GRWM_REQUIRE(features.value().rank() == 3 &&
                   features.dim(2) == cfg_.feature_width,
               "features must be [B, L, F]");
  if (blocks_.size() <= 1) return RunBlocks(tape, features);
  const int64_t b = features.dim(0), l = features.dim(1);
  const int64_t f = cfg_.feature_width, k = cfg_.window;
  std::vector<Var<T>> parts;
  for (int64_t t = 0; t < std::min(k - 1, l); ++t) {
    Var<T> h = RunBlocks(tape, ops::Slice(features, 1, 0, t + 1));
    parts.push_back(ops::Slice(h, 1, t, 1));
  }
  if (l >= k) {
    const int64_t n = l - k + 1;
    std::vector<Var<T>> shifted;
    for (int64_t s = 0; s < k; ++s) {
      shifted.push_back(
          ops::Reshape(ops::Slice(features, 1, s, n), {b, n, 1, f}));
    }
    Var<T> windows = ops::Reshape(ops::Concat(shifted, 2), {b * n, k, f});
    Var<T> h = ops::Slice(RunBlocks(tape, windows), 1, k - 1, 1);
    parts.push_back(ops::Reshape(h, {b, n, f}));
  }
  return parts.size() == 1 ? parts[0] : ops::Concat(parts, 1);
}

template <typename T>
typename RepModel<T>::Latents RepModel<T>::Bottleneck(
    Tape<T>& tape, Var<T> context, const Tensor<T>* noise) const {
  Var<T> stats =
      Apply(tape, bottleneck_, Apply(tape, bottleneck_ln_, context));
  const int axis = stats.value().rank() - 1;
  const int64_t d = cfg_.latent_dim;
  Latents out;
  out.mu = ops::Slice(stats, axis, 0, d);
  out.logvar = ops::Clamp(ops::Slice(stats, axis, d, d), T(cfg_.logvar_min),
                          T(cfg_.logvar_max));
  if (noise == nullptr) {
    out.z = out.mu;
    return out;
  }
  GRWM_REQUIRE(noise->shape() == out.mu.shape(), "noise shape mismatch");
  Var<T> sd = ops::Exp(ops::Scale(out.logvar, T(0.5)));
  out.z = ops::Add(out.mu, ops::Mul(sd, tape.Constant(*noise)));
  return out;
}

template <typename T>
Var<T> RepModel<T>::Decode(Tape<T>& tape, Var<T> z) const {
  GRWM_REQUIRE(z.dim(-1) == cfg_.latent_dim, "latent width mismatch");
  Shape out_shape = z.shape();
  out_shape.back() = cfg_.frame_height;
  out_shape.push_back(cfg_.frame_width);
  out_shape.push_back(3);
  Var<T> h = ops::Relu(Apply(tape, dec1_, z));
  return ops::Reshape(ops::Sigmoid(Apply(tape, dec2_, h)), out_shape);
}

template <typename T>
Var<T> RepModel<T>::Project(Tape<T>& tape, Var<T> z) const {
  if (cfg_.projection == geomloss::ProjectionMode::kWithoutHead) {
    return ops::L2Normalize(z);
  }
  return ops::L2Normalize(Apply(tape, proj_, z));
}

template <typename T>
typename RepModel<T>::Outputs RepModel<T>::Forward(
    Tape<T>& tape, Var<T> frames, numcore::RandomStream* noise_rng) const {
  GRWM_REQUIRE(frames.value().rank() == 5, "frames must be [B, L, H, W, 3]");
  const int64_t b = frames.dim(0), l = frames.dim(1);
  Outputs out;
  Var<T> flat = ops::Reshape(
      frames, {b * l, frames.dim(2), frames.dim(3), frames.dim(4)});
  out.features =
      ops::Reshape(EncodeFrames(tape, flat), {b, l, cfg_.feature_width});
  out.context = Aggregate(tape, out.features);
  if (noise_rng != nullptr) {
    Tensor<T> eps({b, l, cfg_.latent_dim});
    for (T& e : eps.values()) e = T(noise_rng->Normal());
    out.latents = Bottleneck(tape, out.context, &eps);
  } else {
    out.latents = Bottleneck(tape, out.context, nullptr);
  }
  out.recon = Decode(tape, out.latents.z);
  out.embeddings = Project(tape, out.latents.z);
  return out;
}

template <typename T>
Tensor<T> RepModel<T>::EncodeMeans(const Tensor<T>& frames) const {
  Tape<T> tape;
  Var<T> x = tape.Constant(frames);
  const int64_t b = frames.dim(0), l = frames.dim(1);
  Var<T> flat =
      ops::Reshape(x, {b * l, frames.dim(2), frames.dim(3), frames.dim(4)});
  Var<T> feats =
      ops::Reshape(EncodeFrames(tape, flat), {b, l, cfg_.feature_width});
  return Bottleneck(tape, Aggregate(tape, feats), nullptr).mu.value();
}

template <typename T>
Tensor<T> RepModel<T>::DecodeLatents(const Tensor<T>& z) const {
  Tape<T> tape;
  return Decode(tape, tape.Constant(z)).value();
}

template class RepModel<float>;
template class RepModel<double>;

Tensor<float> FramesToTensor(const std::vector<mazeworld::Frame>& frames,
                             int begin, int len) {
  GRWM_REQUIRE(begin >= 0 && len >= 1 &&
                   begin + len <= static_cast<int>(frames.size()),
               "frame range out of bounds");
  const int h = frames[begin].height, w = frames[begin].width;
  Tensor<float> t({len, h, w, 3});
  const size_t per = size_t(h) * w * 3;
  for (int i = 0; i < len; ++i) {
    const std::vector<uint8_t>& rgb = frames[begin + i].rgb;
    GRWM_REQUIRE(rgb.size() == per, "frame dims differ within sequence");
    float* dst = t.data() + i * per;
    for (size_t p = 0; p < per; ++p) dst[p] = rgb[p] * (1.0f / 255.0f);
  }
  return t;
}

mazeworld::Frame TensorToFrame(const float* rgb, int height, int width) {
  mazeworld::Frame f{height, width,
                     std::vector<uint8_t>(size_t(height) * width * 3)};
  for (size_t i = 0; i < f.rgb.size(); ++i) {
    f.rgb[i] = static_cast<uint8_t>(
        std::lround(std::clamp(rgb[i], 0.0f, 1.0f) * 255.0f));
  }
  return f;
}

}  // namespace grwm::repmodel
