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

#ifndef GRWM_REPMODEL_REP_MODEL_H_
#define GRWM_REPMODEL_REP_MODEL_H_

#include <cstdint>
#include <string>
#include <vector>

#include "grwm/geomloss/losses.h"
#include "grwm/mazeworld/env.h"
#include "grwm/numcore/params.h"
#include "grwm/numcore/rng.h"
#include "grwm/numcore/tape.h"

namespace grwm::repmodel {

using numcore::ParamSet;
using numcore::Shape;
using numcore::Tape;
using numcore::Tensor;
using numcore::Var;

struct RepConfig {
  int frame_height = 32;
  int frame_width = 32;
  // One stride-2 patch convolution per entry.
  std::vector<int> conv_channels = {16, 32, 32};
  int feature_width = 128;
  int agg_blocks = 2;
  int heads = 4;
  // Context window k: position t sees frames t-k+1..t.
  int window = 8;
  int latent_dim = 32;
  int proj_dim = 64;
  int decoder_hidden = 256;
  geomloss::ProjectionMode projection = geomloss::ProjectionMode::kWithHead;
  double logvar_min = -10.0;
  double logvar_max = 4.0;

  void Validate() const;
  uint64_t Digest() const;
  std::string ToJson() const;
  static RepConfig FromJson(const std::string& text);
  bool operator==(const RepConfig&) const = default;
};

// Temporally contextualized VAE. A per-frame convolutional encoder feeds a
// causal sliding-window transformer; each position yields a Gaussian latent
// that the decoder maps back to that frame alone.
template <typename T>
class RepModel {
 public:
  RepModel(const RepConfig& cfg, uint64_t seed);
  RepModel(const RepModel&) = delete;
  RepModel& operator=(const RepModel&) = delete;

  const RepConfig& config() const { return cfg_; }
  ParamSet<T>& params() { return params_; }
  const ParamSet<T>& params() const { return params_; }

  // frames [N, H, W, 3] -> features [N, feature_width].
  Var<T> EncodeFrames(Tape<T>& tape, Var<T> frames) const;
  // features [B, L, F] -> contextual features [B, L, F].
  Var<T> Aggregate(Tape<T>& tape, Var<T> features) const;

  struct Latents {
    Var<T> mu;
    Var<T> logvar;
    Var<T> z;
  };
  // `noise` (same shape as mu) selects sampling; null means evaluation mode,
  // where z is mu.
  Latents Bottleneck(Tape<T>& tape, Var<T> context,
                     const Tensor<T>* noise) const;
  // z [..., d] -> frames [..., H, W, 3] in [0, 1].
  Var<T> Decode(Tape<T>& tape, Var<T> z) const;
  // Unit-norm embeddings [..., D] (or [..., d] without the head).
  Var<T> Project(Tape<T>& tape, Var<T> z) const;

  struct Outputs {
    Var<T> features;
    Var<T> context;
    Latents latents;
    Var<T> recon;
    Var<T> embeddings;
  };
  // frames [B, L, H, W, 3]. With `noise_rng` the bottleneck samples.
  Outputs Forward(Tape<T>& tape, Var<T> frames,
                  numcore::RandomStream* noise_rng) const;

  // Evaluation-mode latent means for frames [B, L, H, W, 3] -> [B, L, d].
  Tensor<T> EncodeMeans(const Tensor<T>& frames) const;
  // z [N, d] -> frames [N, H, W, 3].
  Tensor<T> DecodeLatents(const Tensor<T>& z) const;

 private:
  struct Block {
    numcore::LayerNormParams<T> ln1, ln2;
    numcore::Linear<T> q, k, v, o, fc1, fc2;
    numcore::Parameter<T>* rel_bias = nullptr;
  };

  Var<T> RunBlocks(Tape<T>& tape, Var<T> h) const;

  RepConfig cfg_;
  ParamSet<T> params_;
  std::vector<numcore::Linear<T>> conv_;
  numcore::Linear<T> enc_head_;
  std::vector<Block> blocks_;
  numcore::LayerNormParams<T> bottleneck_ln_;
  numcore::Linear<T> bottleneck_;
  numcore::Linear<T> dec1_, dec2_;
  numcore::Linear<T> proj_;
};

// Pixels of frames[begin, begin+len) scaled to [0, 1]: [len, H, W, 3].
Tensor<float> FramesToTensor(const std::vector<mazeworld::Frame>& frames,
                             int begin, int len);
// Inverse of the scaling, rounding to the nearest byte.
mazeworld::Frame TensorToFrame(const float* rgb, int height, int width);

}  // namespace grwm::repmodel

#endif  // GRWM_REPMODEL_REP_MODEL_H_
