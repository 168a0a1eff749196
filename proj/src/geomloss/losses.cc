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

#include "grwm/geomloss/losses.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "grwm/common/errors.h"
#include "grwm/numcore/ops.h"

namespace grwm::geomloss {
namespace {

namespace ops = numcore::ops;

constexpr double kDistanceGuard = 1e-12;
constexpr double kKernelScale = 2.0;

struct Layout {
  int64_t b, l, d;
};

Layout EmbeddingLayout(const numcore::Shape& s) {
  GRWM_REQUIRE(s.size() == 3, "embeddings must be [B, L, D], got " +
                                  numcore::ShapeString(s));
  return {s[0], s[1], s[2]};
}

int64_t FrameCount(const numcore::Shape& s) {
  GRWM_REQUIRE(s.size() >= 3, "frames must be [..., H, W, C]");
  int64_t n = 1;
  for (size_t i = 0; i + 3 < s.size(); ++i) n *= s[i];
  return n;
}

template <typename T>
double SquaredDistance(const T* a, const T* b, int64_t d) {
  double s = 0.0;
  for (int64_t k = 0; k < d; ++k) {
    const double diff = double(a[k]) - double(b[k]);
    s += diff * diff;
  }
  return s;
}

// Pair list shared by value and gradient: (i, j) as flat row indices.
std::vector<std::pair<int64_t, int64_t>> SlowPairs(const Layout& lay,
                                                   SlowMode mode) {
  std::vector<std::pair<int64_t, int64_t>> pairs;
  for (int64_t b = 0; b < lay.b; ++b) {
    const int64_t base = b * lay.l;
    if (mode == SlowMode::kAdjacentOnly) {
      for (int64_t t = 1; t < lay.l; ++t) pairs.push_back({base + t - 1, base + t});
    } else {
      for (int64_t i = 0; i < lay.l; ++i) {
        for (int64_t j = i + 1; j < lay.l; ++j) pairs.push_back({base + i, base + j});
      }
    }
  }
  return pairs;
}

template <typename T>
double SlowValue(const T* p, const Layout& lay, SlowMode mode) {
  GRWM_REQUIRE(lay.l >= 2, "slowness needs at least two timesteps");
  const auto pairs = SlowPairs(lay, mode);
  double s = 0.0;
  for (auto [i, j] : pairs) {
    s += std::sqrt(SquaredDistance(p + i * lay.d, p + j * lay.d, lay.d));
  }
  // Every trajectory has the same number of pairs, so the mean over pairs is
  // the mean over trajectories of the per-trajectory means.
  return s / double(pairs.size());
}

// Returns the loss and, when `kernel` is non-null, the per-pair kernel values
// needed for the gradient.
template <typename T>
double UniformValue(const T* p, const Layout& lay, std::vector<double>* kernel,
                    double* log_sum_shift) {
  GRWM_REQUIRE(lay.b >= 2, "uniformity needs at least two trajectories");
  const int64_t n = lay.b * lay.l;
  std::vector<double> logits;
  logits.reserve(size_t(n) * size_t(n - lay.l) / 2);
  for (int64_t i = 0; i < n; ++i) {
    for (int64_t j = (i / lay.l + 1) * lay.l; j < n; ++j) {
      logits.push_back(-kKernelScale *
                       SquaredDistance(p + i * lay.d, p + j * lay.d, lay.d));
    }
  }
  const double mx = *std::max_element(logits.begin(), logits.end());
  double s = 0.0;
  for (double& v : logits) {
    v = std::exp(v - mx);
    s += v;
  }
  if (kernel) *kernel = std::move(logits);
  if (log_sum_shift) *log_sum_shift = s;
  // log(mean) = mx + log(sum shifted) - log(count).
  const double count =
      double(n) * double(n - lay.l) / 2.0;  // cross-trajectory pairs
  return std::min(0.0, mx + std::log(s) - std::log(count));
}

}  // namespace

const char* SlowModeName(SlowMode m) {
  return m == SlowMode::kAllPairs ? "all_pairs" : "adjacent";
}
const char* ProjectionModeName(ProjectionMode m) {
  return m == ProjectionMode::kWithHead ? "with_head" : "without_head";
}
const char* ReconReductionName(ReconReduction r) {
  return r == ReconReduction::kPixelMean ? "pixel_mean" : "pixel_sum";
}

void LossConfig::Validate() const {
  GRWM_REQUIRE(beta >= 0.0 && lambda_slow >= 0.0 && lambda_uniform >= 0.0,
               "loss weights must be non-negative");
}

double ReconLossValue(const Tensor<double>& pred, const Tensor<double>& target,
                      ReconReduction reduction) {
  GRWM_REQUIRE(pred.shape() == target.shape(),
               "reconstruction shape mismatch " +
                   numcore::ShapeString(pred.shape()) + " vs " +
                   numcore::ShapeString(target.shape()));
  double s = 0.0;
  for (int64_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    s += d * d;
  }
  return reduction == ReconReduction::kPixelMean
             ? s / double(pred.size())
             : s / double(FrameCount(pred.shape()));
}

double KlLossValue(const Tensor<double>& mu, const Tensor<double>& logvar) {
  GRWM_REQUIRE(mu.shape() == logvar.shape(), "mu/logvar shape mismatch");
  double s = 0.0;
  for (int64_t i = 0; i < mu.size(); ++i) {
    s += mu[i] * mu[i] + std::exp(logvar[i]) - logvar[i] - 1.0;
  }
  return 0.5 * s / double(mu.size() / mu.dim(-1));
}

double SlowLossValue(const Tensor<double>& p, SlowMode mode) {
  return SlowValue(p.data(), EmbeddingLayout(p.shape()), mode);
}

double UniformLossValue(const Tensor<double>& p) {
  return UniformValue(p.data(), EmbeddingLayout(p.shape()), nullptr, nullptr);
}

template <typename T>
Var<T> ReconLoss(Var<T> pred, Var<T> target, ReconReduction reduction) {
  GRWM_REQUIRE(pred.shape() == target.shape(),
               "reconstruction shape mismatch " +
                   numcore::ShapeString(pred.shape()) + " vs " +
                   numcore::ShapeString(target.shape()));
  Var<T> sq = ops::Square(ops::Sub(pred, target));
  if (reduction == ReconReduction::kPixelMean) return ops::Mean(sq);
  return ops::Scale(ops::Sum(sq), T(1.0 / double(FrameCount(pred.shape()))));
}

template <typename T>
Var<T> KlLoss(Var<T> mu, Var<T> logvar) {
  GRWM_REQUIRE(mu.shape() == logvar.shape(), "mu/logvar shape mismatch");
  Var<T> terms = ops::AddScalar(
      ops::Sub(ops::Add(ops::Square(mu), ops::Exp(logvar)), logvar), T(-1));
  const double rows = double(mu.size() / mu.dim(-1));
  return ops::Scale(ops::Sum(terms), T(0.5 / rows));
}

template <typename T>
Var<T> SlowLoss(Var<T> p, SlowMode mode) {
  const Layout lay = EmbeddingLayout(p.shape());
  const T* data = p.value().data();
  const double value = SlowValue(data, lay, mode);
  return p.tape->Record(
      "slow_loss", Tensor<T>::Scalar(T(value)), {p.id},
      [p, lay, mode](numcore::Tape<T>& tape, int self) {
        const double g = tape.grad(self).item();
        const auto pairs = SlowPairs(lay, mode);
        const double w = g / double(pairs.size());
        const T* x = tape.value(p.id).data();
        T* gx = tape.grad(p.id).data();
        for (auto [i, j] : pairs) {
          const T* a = x + i * lay.d;
          const T* b = x + j * lay.d;
          const double inv =
              w / std::sqrt(SquaredDistance(a, b, lay.d) + kDistanceGuard);
          for (int64_t k = 0; k < lay.d; ++k) {
            const double diff = (double(a[k]) - double(b[k])) * inv;
            gx[i * lay.d + k] += T(diff);
            gx[j * lay.d + k] -= T(diff);
          }
        }
      });
}

template <typename T>
Var<T> UniformLoss(Var<T> p) {
  const Layout lay = EmbeddingLayout(p.shape());
  const double value = UniformValue(p.value().data(), lay, nullptr, nullptr);
  return p.tape->Record(
      "uniform_loss", Tensor<T>::Scalar(T(value)), {p.id},
      [p, lay](numcore::Tape<T>& tape, int self) {
        const double g = tape.grad(self).item();
        const T* x = tape.value(p.id).data();
        std::vector<double> kernel;
        double sum = 0.0;
        UniformValue(x, lay, &kernel, &sum);
        T* gx = tape.grad(p.id).data();
        const int64_t n = lay.b * lay.l;
        size_t idx = 0;
        for (int64_t i = 0; i < n; ++i) {
          for (int64_t j = (i / lay.l + 1) * lay.l; j < n; ++j, ++idx) {
            // d/dp_i of -2|p_i - p_j|^2 is -4 (p_i - p_j).
            const double c = -2.0 * kKernelScale * g * kernel[idx] / sum;
            for (int64_t k = 0; k < lay.d; ++k) {
              const double diff =
                  c * (double(x[i * lay.d + k]) - double(x[j * lay.d + k]));
              gx[i * lay.d + k] += T(diff);
              gx[j * lay.d + k] -= T(diff);
            }
          }
        }
      });
}

double CombineTerms(const LossReport& r, const LossConfig& cfg) {
  return r.recon + cfg.beta * r.kl + cfg.lambda_slow * r.slow +
         cfg.lambda_uniform * r.uniform;
}

template <typename T>
Var<T> TotalLoss(Var<T> recon, Var<T> target, Var<T> mu, Var<T> logvar,
                 Var<T> embeddings, const LossConfig& cfg,
                 LossReport* report) {
  cfg.Validate();
  Var<T> total = ReconLoss(recon, target, cfg.recon);
  LossReport r;
  r.recon = double(total.value().item());
  auto add = [&](double weight, Var<T> term) {
    total = ops::Add(total, ops::Scale(term, T(weight)));
  };
  const Tensor<double> p = embeddings.value().template Cast<double>();
  if (cfg.beta > 0.0) {
    Var<T> kl = KlLoss(mu, logvar);
    r.kl = double(kl.value().item());
    add(cfg.beta, kl);
  } else {
    r.kl = KlLossValue(mu.value().template Cast<double>(),
                       logvar.value().template Cast<double>());
  }
  if (cfg.lambda_slow > 0.0) {
    Var<T> slow = SlowLoss(embeddings, cfg.slow_mode);
    r.slow = double(slow.value().item());
    add(cfg.lambda_slow, slow);
  } else {
    r.slow = SlowLossValue(p, cfg.slow_mode);
  }
  if (cfg.lambda_uniform > 0.0) {
    Var<T> uni = UniformLoss(embeddings);
    r.uniform = double(uni.value().item());
    add(cfg.lambda_uniform, uni);
  } else {
    r.uniform = p.dim(0) >= 2 ? UniformLossValue(p) : 0.0;
  }
  r.weighted_kl = cfg.beta * r.kl;
  r.weighted_slow = cfg.lambda_slow * r.slow;
  r.weighted_uniform = cfg.lambda_uniform * r.uniform;
  r.total = CombineTerms(r, cfg);
  if (report) *report = r;
  return total;
}

#define GRWM_INSTANTIATE_LOSSES(T)                                          \
  template Var<T> ReconLoss(Var<T>, Var<T>, ReconReduction);                \
  template Var<T> KlLoss(Var<T>, Var<T>);                                   \
  template Var<T> SlowLoss(Var<T>, SlowMode);                               \
  template Var<T> UniformLoss(Var<T>);                                      \
  template Var<T> TotalLoss(Var<T>, Var<T>, Var<T>, Var<T>, Var<T>,         \
                            const LossConfig&, LossReport*);

GRWM_INSTANTIATE_LOSSES(float)
GRWM_INSTANTIATE_LOSSES(double)

}  // namespace grwm::geomloss
