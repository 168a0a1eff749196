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

#include "grwm/numcore/ops.h"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <memory>

namespace grwm::numcore::ops {
namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapMat = Eigen::Map<RowMat<T>>;
template <typename T>
using CMapMat = Eigen::Map<const RowMat<T>>;
template <typename T>
using MapRowVec = Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>>;
template <typename T>
using CMapRowVec = Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>>;

template <typename T>
void RequireSameTape(Var<T> a, Var<T> b) {
  GRWM_REQUIRE(a.valid() && b.valid() && a.tape == b.tape,
               "operands must live on the same tape");
}

template <typename T>
void RequireSameShape(Var<T> a, Var<T> b) {
  RequireSameTape(a, b);
  GRWM_REQUIRE(a.shape() == b.shape(), "shape mismatch " +
                                           ShapeString(a.shape()) + " vs " +
                                           ShapeString(b.shape()));
}

// y = f(x) elementwise; dfdx(x, y) gives the local derivative.
template <typename T, typename Fwd, typename Deriv>
Var<T> Unary(const char* op, Var<T> x, Fwd f, Deriv dfdx) {
  GRWM_REQUIRE(x.valid(), "invalid operand");
  const Tensor<T>& xv = x.value();
  Tensor<T> y(xv.shape());
  for (int64_t i = 0; i < xv.size(); ++i) y[i] = f(xv[i]);
  const int xid = x.id;
  return x.tape->Record(op, std::move(y), {xid},
                        [xid, dfdx](Tape<T>& t, int self) {
                          if (!t.needs_grad(xid)) return;
                          const Tensor<T>& xv = t.value(xid);
                          const Tensor<T>& yv = t.value(self);
                          const Tensor<T>& g = t.grad(self);
                          Tensor<T>& gx = t.grad(xid);
                          for (int64_t i = 0; i < g.size(); ++i) {
                            gx[i] += g[i] * dfdx(xv[i], yv[i]);
                          }
                        });
}

template <typename T>
void Accumulate(Tensor<T>& dst, const Tensor<T>& src, T scale = T(1)) {
  T* d = dst.data();
  const T* s = src.data();
  for (int64_t i = 0; i < src.size(); ++i) d[i] += scale * s[i];
}

int NormalizeAxis(int axis, int rank) {
  if (axis < 0) axis += rank;
  GRWM_REQUIRE(axis >= 0 && axis < rank, "axis out of range");
  return axis;
}

}  // namespace

template <typename T>
Var<T> Add(Var<T> a, Var<T> b) {
  RequireSameShape(a, b);
  Tensor<T> y = a.value();
  Accumulate(y, b.value());
  const int ia = a.id, ib = b.id;
  return a.tape->Record("add", std::move(y), {ia, ib},
                        [ia, ib](Tape<T>& t, int self) {
                          const Tensor<T>& g = t.grad(self);
                          if (t.needs_grad(ia)) Accumulate(t.grad(ia), g);
                          if (t.needs_grad(ib)) Accumulate(t.grad(ib), g);
                        });
}

template <typename T>
Var<T> Sub(Var<T> a, Var<T> b) {
  RequireSameShape(a, b);
  Tensor<T> y = a.value();
  Accumulate(y, b.value(), T(-1));
  const int ia = a.id, ib = b.id;
  return a.tape->Record("sub", std::move(y), {ia, ib},
                        [ia, ib](Tape<T>& t, int self) {
                          const Tensor<T>& g = t.grad(self);
                          if (t.needs_grad(ia)) Accumulate(t.grad(ia), g);
                          if (t.needs_grad(ib)) {
                            Accumulate(t.grad(ib), g, T(-1));
                          }
                        });
}

template <typename T>
Var<T> Mul(Var<T> a, Var<T> b) {
  RequireSameShape(a, b);
  const Tensor<T>& av = a.value();
  const Tensor<T>& bv = b.value();
  Tensor<T> y(av.shape());
  for (int64_t i = 0; i < y.size(); ++i) y[i] = av[i] * bv[i];
  const int ia = a.id, ib = b.id;
  return a.tape->Record(
      "mul", std::move(y), {ia, ib}, [ia, ib](Tape<T>& t, int self) {
        const Tensor<T>& g = t.grad(self);
        const Tensor<T>& av = t.value(ia);
        const Tensor<T>& bv = t.value(ib);
        if (t.needs_grad(ia)) {
          Tensor<T>& ga = t.grad(ia);
          for (int64_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
        }
        if (t.needs_grad(ib)) {
          Tensor<T>& gb = t.grad(ib);
          for (int64_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
        }
      });
}

template <typename T>
Var<T> Scale(Var<T> a, T s) {
  return Unary<T>("scale", a, [s](T x) { return s * x; },
                  [s](T, T) { return s; });
}

template <typename T>
Var<T> AddScalar(Var<T> a, T s) {
  return Unary<T>("add_scalar", a, [s](T x) { return x + s; },
                  [](T, T) { return T(1); });
}

template <typename T>
Var<T> Relu(Var<T> x) {
  return Unary<T>("relu", x, [](T v) { return v > T(0) ? v : T(0); },
                  [](T v, T) { return v > T(0) ? T(1) : T(0); });
}

template <typename T>
Var<T> Tanh(Var<T> x) {
  return Unary<T>("tanh", x, [](T v) { return std::tanh(v); },
                  [](T, T y) { return T(1) - y * y; });
}

template <typename T>
Var<T> Sigmoid(Var<T> x) {
  return Unary<T>(
      "sigmoid", x,
      [](T v) {
        if (v >= T(0)) return T(1) / (T(1) + std::exp(-v));
        const T e = std::exp(v);
        return e / (T(1) + e);
      },
      [](T, T y) { return y * (T(1) - y); });
}

template <typename T>
Var<T> Exp(Var<T> x) {
  return Unary<T>("exp", x, [](T v) { return std::exp(v); },
                  [](T, T y) { return y; });
}

template <typename T>
Var<T> Log(Var<T> x) {
  return Unary<T>("log", x, [](T v) { return std::log(v); },
                  [](T v, T) { return T(1) / v; });
}

template <typename T>
Var<T> Square(Var<T> x) {
  return Unary<T>("square", x, [](T v) { return v * v; },
                  [](T v, T) { return T(2) * v; });
}

template <typename T>
Var<T> Sqrt(Var<T> x) {
  return Unary<T>("sqrt", x, [](T v) { return std::sqrt(v); },
                  [](T, T y) { return T(0.5) / y; });
}

template <typename T>
Var<T> Clamp(Var<T> x, T lo, T hi) {
  GRWM_REQUIRE(lo <= hi, "clamp bounds inverted");
  return Unary<T>("clamp", x, [lo, hi](T v) { return std::clamp(v, lo, hi); },
                  [lo, hi](T v, T) {
                    return (v >= lo && v <= hi) ? T(1) : T(0);
                  });
}

template <typename T>
Var<T> MatMul(Var<T> a, Var<T> b) {
  RequireSameTape(a, b);
  GRWM_REQUIRE(a.value().rank() == 2 && b.value().rank() == 2,
               "matmul expects rank-2 operands");
  const int64_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  GRWM_REQUIRE(b.dim(0) == k, "inner dimensions differ");
  Tensor<T> y({m, n});
  MapMat<T>(y.data(), m, n).noalias() =
      CMapMat<T>(a.value().data(), m, k) * CMapMat<T>(b.value().data(), k, n);
  const int ia = a.id, ib = b.id;
  return a.tape->Record(
      "matmul", std::move(y), {ia, ib}, [ia, ib, m, k, n](Tape<T>& t, int self) {
        CMapMat<T> g(t.grad(self).data(), m, n);
        if (t.needs_grad(ia)) {
          MapMat<T>(t.grad(ia).data(), m, k).noalias() +=
              g * CMapMat<T>(t.value(ib).data(), k, n).transpose();
        }
        if (t.needs_grad(ib)) {
          MapMat<T>(t.grad(ib).data(), k, n).noalias() +=
              CMapMat<T>(t.value(ia).data(), m, k).transpose() * g;
        }
      });
}

template <typename T>
Var<T> Affine(Var<T> x, Var<T> w, Var<T> b) {
  RequireSameTape(x, w);
  const Tensor<T>& xv = x.value();
  const Tensor<T>& wv = w.value();
  GRWM_REQUIRE(wv.rank() == 2, "affine weight must be rank 2");
  GRWM_REQUIRE(xv.rank() >= 1, "affine input must have rank >= 1");
  const int64_t k = wv.dim(0), n = wv.dim(1);
  GRWM_REQUIRE(xv.dim(-1) == k, "affine input width " +
                                    std::to_string(xv.dim(-1)) +
                                    " != weight rows " + std::to_string(k));
  const int64_t m = xv.size() / k;
  const bool has_bias = b.valid();
  if (has_bias) {
    RequireSameTape(x, b);
    GRWM_REQUIRE(b.value().size() == n, "affine bias width mismatch");
  }
  Shape out_shape = xv.shape();
  out_shape.back() = n;
  Tensor<T> y(out_shape);
  MapMat<T> ym(y.data(), m, n);
  ym.noalias() = CMapMat<T>(xv.data(), m, k) * CMapMat<T>(wv.data(), k, n);
  if (has_bias) ym.rowwise() += CMapRowVec<T>(b.value().data(), n);
  const int ix = x.id, iw = w.id, ib = has_bias ? b.id : -1;
  std::vector<int> parents = {ix, iw};
  if (has_bias) parents.push_back(ib);
  return x.tape->Record(
      "affine", std::move(y), std::move(parents),
      [ix, iw, ib, m, k, n](Tape<T>& t, int self) {
        CMapMat<T> g(t.grad(self).data(), m, n);
        if (t.needs_grad(ix)) {
          MapMat<T>(t.grad(ix).data(), m, k).noalias() +=
              g * CMapMat<T>(t.value(iw).data(), k, n).transpose();
        }
        if (t.needs_grad(iw)) {
          MapMat<T>(t.grad(iw).data(), k, n).noalias() +=
              CMapMat<T>(t.value(ix).data(), m, k).transpose() * g;
        }
        if (ib >= 0 && t.needs_grad(ib)) {
          MapRowVec<T>(t.grad(ib).data(), n) += g.colwise().sum();
        }
      });
}

template <typename T>
Var<T> LayerNorm(Var<T> x, Var<T> gain, Var<T> bias, T eps) {
  RequireSameTape(x, gain);
  RequireSameTape(x, bias);
  const Tensor<T>& xv = x.value();
  const int64_t f = xv.dim(-1);
  GRWM_REQUIRE(gain.value().size() == f && bias.value().size() == f,
               "layer norm gain/bias width mismatch");
  const int64_t rows = xv.size() / f;
  auto xhat = std::make_shared<std::vector<T>>(xv.size());
  auto inv_std = std::make_shared<std::vector<T>>(rows);
  Tensor<T> y(xv.shape());
  const T* gv = gain.value().data();
  const T* bv = bias.value().data();
  for (int64_t r = 0; r < rows; ++r) {
    const T* xr = xv.data() + r * f;
    T mean = 0;
    for (int64_t i = 0; i < f; ++i) mean += xr[i];
    mean /= T(f);
    T var = 0;
    for (int64_t i = 0; i < f; ++i) var += (xr[i] - mean) * (xr[i] - mean);
    var /= T(f);
    const T inv = T(1) / std::sqrt(var + eps);
    (*inv_std)[r] = inv;
    for (int64_t i = 0; i < f; ++i) {
      const T h = (xr[i] - mean) * inv;
      (*xhat)[r * f + i] = h;
      y[r * f + i] = h * gv[i] + bv[i];
    }
  }
  const int ix = x.id, ig = gain.id, ib = bias.id;
  return x.tape->Record(
      "layer_norm", std::move(y), {ix, ig, ib},
      [ix, ig, ib, f, rows, xhat, inv_std](Tape<T>& t, int self) {
        const Tensor<T>& g = t.grad(self);
        const T* gv = t.value(ig).data();
        if (t.needs_grad(ig) || t.needs_grad(ib)) {
          Tensor<T>& gg = t.grad(ig);
          Tensor<T>& gb = t.grad(ib);
          for (int64_t r = 0; r < rows; ++r) {
            for (int64_t i = 0; i < f; ++i) {
              gg[i] += g[r * f + i] * (*xhat)[r * f + i];
              gb[i] += g[r * f + i];
            }
          }
        }
        if (!t.needs_grad(ix)) return;
        Tensor<T>& gx = t.grad(ix);
        for (int64_t r = 0; r < rows; ++r) {
          T mean_d = 0, mean_dh = 0;
          for (int64_t i = 0; i < f; ++i) {
            const T d = g[r * f + i] * gv[i];
            mean_d += d;
            mean_dh += d * (*xhat)[r * f + i];
          }
          mean_d /= T(f);
          mean_dh /= T(f);
          const T inv = (*inv_std)[r];
          for (int64_t i = 0; i < f; ++i) {
            const T d = g[r * f + i] * gv[i];
            gx[r * f + i] +=
                inv * (d - mean_d - (*xhat)[r * f + i] * mean_dh);
          }
        }
      });
}

template <typename T>
Var<T> L2Normalize(Var<T> x, T eps) {
  GRWM_REQUIRE(x.valid(), "invalid operand");
  const Tensor<T>& xv = x.value();
  const int64_t f = xv.dim(-1);
  const int64_t rows = xv.size() / f;
  auto norms = std::make_shared<std::vector<T>>(rows);
  Tensor<T> y(xv.shape());
  for (int64_t r = 0; r < rows; ++r) {
    T ss = 0;
    for (int64_t i = 0; i < f; ++i) ss += xv[r * f + i] * xv[r * f + i];
    const T n = std::sqrt(ss + eps);
    (*norms)[r] = n;
    for (int64_t i = 0; i < f; ++i) y[r * f + i] = xv[r * f + i] / n;
  }
  const int ix = x.id;
  return x.tape->Record(
      "l2_normalize", std::move(y), {ix},
      [ix, f, rows, norms](Tape<T>& t, int self) {
        if (!t.needs_grad(ix)) return;
        const Tensor<T>& g = t.grad(self);
        const Tensor<T>& yv = t.value(self);
        Tensor<T>& gx = t.grad(ix);
        for (int64_t r = 0; r < rows; ++r) {
          T dot = 0;
          for (int64_t i = 0; i < f; ++i) dot += yv[r * f + i] * g[r * f + i];
          const T inv = T(1) / (*norms)[r];
          for (int64_t i = 0; i < f; ++i) {
            gx[r * f + i] += inv * (g[r * f + i] - yv[r * f + i] * dot);
          }
        }
      });
}

template <typename T>
Var<T> Sum(Var<T> x) {
  GRWM_REQUIRE(x.valid(), "invalid operand");
  T s = 0;
  for (T v : x.value().values()) s += v;
  const int ix = x.id;
  return x.tape->Record("sum", Tensor<T>::Scalar(s), {ix},
                        [ix](Tape<T>& t, int self) {
                          if (!t.needs_grad(ix)) return;
                          const T g = t.grad(self)[0];
                          for (T& v : t.grad(ix).values()) v += g;
                        });
}

template <typename T>
Var<T> Mean(Var<T> x) {
  GRWM_REQUIRE(x.valid() && x.size() > 0, "mean of empty tensor");
  const T n = T(x.size());
  T s = 0;
  for (T v : x.value().values()) s += v;
  const int ix = x.id;
  return x.tape->Record("mean", Tensor<T>::Scalar(s / n), {ix},
                        [ix, n](Tape<T>& t, int self) {
                          if (!t.needs_grad(ix)) return;
                          const T g = t.grad(self)[0] / n;
                          for (T& v : t.grad(ix).values()) v += g;
                        });
}

template <typename T>
Var<T> Concat(const std::vector<Var<T>>& xs, int axis) {
  GRWM_REQUIRE(!xs.empty(), "concat of nothing");
  const Shape& s0 = xs[0].shape();
  axis = NormalizeAxis(axis, static_cast<int>(s0.size()));
  int64_t outer = 1, inner = 1;
  for (int i = 0; i < axis; ++i) outer *= s0[i];
  for (size_t i = axis + 1; i < s0.size(); ++i) inner *= s0[i];
  Shape out_shape = s0;
  out_shape[axis] = 0;
  std::vector<int64_t> widths;
  std::vector<int> ids;
  for (const Var<T>& x : xs) {
    RequireSameTape(xs[0], x);
    const Shape& s = x.shape();
    GRWM_REQUIRE(s.size() == s0.size(), "concat rank mismatch");
    for (size_t i = 0; i < s.size(); ++i) {
      if (static_cast<int>(i) != axis) {
        GRWM_REQUIRE(s[i] == s0[i], "concat extent mismatch");
      }
    }
    out_shape[axis] += s[axis];
    widths.push_back(s[axis] * inner);
    ids.push_back(x.id);
  }
  const int64_t total = out_shape[axis] * inner;
  Tensor<T> y(out_shape);
  int64_t offset = 0;
  for (size_t p = 0; p < xs.size(); ++p) {
    const T* src = xs[p].value().data();
    for (int64_t o = 0; o < outer; ++o) {
      std::copy_n(src + o * widths[p], widths[p],
                  y.data() + o * total + offset);
    }
    offset += widths[p];
  }
  return xs[0].tape->Record(
      "concat", std::move(y), ids,
      [ids, widths, outer, total](Tape<T>& t, int self) {
        const Tensor<T>& g = t.grad(self);
        int64_t offset = 0;
        for (size_t p = 0; p < ids.size(); ++p) {
          if (t.needs_grad(ids[p])) {
            Tensor<T>& gx = t.grad(ids[p]);
            for (int64_t o = 0; o < outer; ++o) {
              for (int64_t i = 0; i < widths[p]; ++i) {
                gx[o * widths[p] + i] += g[o * total + offset + i];
              }
            }
          }
          offset += widths[p];
        }
      });
}

template <typename T>
Var<T> Slice(Var<T> x, int axis, int64_t start, int64_t length) {
  GRWM_REQUIRE(x.valid(), "invalid operand");
  const Shape& s = x.shape();
  axis = NormalizeAxis(axis, static_cast<int>(s.size()));
  GRWM_REQUIRE(start >= 0 && length >= 0 && start + length <= s[axis],
               "slice out of range");
  int64_t outer = 1, inner = 1;
  for (int i = 0; i < axis; ++i) outer *= s[i];
  for (size_t i = axis + 1; i < s.size(); ++i) inner *= s[i];
  const int64_t src_w = s[axis] * inner;
  const int64_t dst_w = length * inner;
  const int64_t off = start * inner;
  Shape out_shape = s;
  out_shape[axis] = length;
  Tensor<T> y(out_shape);
  const T* src = x.value().data();
  for (int64_t o = 0; o < outer; ++o) {
    std::copy_n(src + o * src_w + off, dst_w, y.data() + o * dst_w);
  }
  const int ix = x.id;
  return x.tape->Record(
      "slice", std::move(y), {ix},
      [ix, outer, src_w, dst_w, off](Tape<T>& t, int self) {
        if (!t.needs_grad(ix)) return;
        const Tensor<T>& g = t.grad(self);
        Tensor<T>& gx = t.grad(ix);
        for (int64_t o = 0; o < outer; ++o) {
          for (int64_t i = 0; i < dst_w; ++i) {
            gx[o * src_w + off + i] += g[o * dst_w + i];
          }
        }
      });
}

template <typename T>
Var<T> Reshape(Var<T> x, Shape shape) {
  GRWM_REQUIRE(x.valid(), "invalid operand");
  Tensor<T> y = x.value().Reshape(std::move(shape));
  const int ix = x.id;
  return x.tape->Record("reshape", std::move(y), {ix},
                        [ix](Tape<T>& t, int self) {
                          if (!t.needs_grad(ix)) return;
                          Accumulate(t.grad(ix), t.grad(self));
                        });
}

template <typename T>
Var<T> Patches(Var<T> x, int kernel, int stride, int pad) {
  GRWM_REQUIRE(x.valid() && x.value().rank() == 4,
               "patches expects [N,H,W,C]");
  GRWM_REQUIRE(kernel >= 1 && stride >= 1 && pad >= 0,
               "invalid patch geometry");
  const int64_t n = x.dim(0), h = x.dim(1), w = x.dim(2), c = x.dim(3);
  const int64_t ho = (h + 2 * pad - kernel) / stride + 1;
  const int64_t wo = (w + 2 * pad - kernel) / stride + 1;
  GRWM_REQUIRE(ho >= 1 && wo >= 1, "patch kernel larger than input");
  const int64_t pw = int64_t(kernel) * kernel * c;
  Tensor<T> y({n, ho, wo, pw});
  const T* xv = x.value().data();
  T* yv = y.data();
  for (int64_t b = 0; b < n; ++b) {
    for (int64_t oh = 0; oh < ho; ++oh) {
      for (int64_t ow = 0; ow < wo; ++ow) {
        T* dst = yv + ((b * ho + oh) * wo + ow) * pw;
        for (int ki = 0; ki < kernel; ++ki) {
          const int64_t ih = oh * stride - pad + ki;
          for (int kj = 0; kj < kernel; ++kj) {
            const int64_t iw = ow * stride - pad + kj;
            T* d = dst + (int64_t(ki) * kernel + kj) * c;
            if (ih < 0 || ih >= h || iw < 0 || iw >= w) continue;
            std::copy_n(xv + ((b * h + ih) * w + iw) * c, c, d);
          }
        }
      }
    }
  }
  const int ix = x.id;
  return x.tape->Record(
      "patches", std::move(y), {ix},
      [ix, n, h, w, c, ho, wo, pw, kernel, stride, pad](Tape<T>& t, int self) {
        if (!t.needs_grad(ix)) return;
        const T* g = t.grad(self).data();
        T* gx = t.grad(ix).data();
        for (int64_t b = 0; b < n; ++b) {
          for (int64_t oh = 0; oh < ho; ++oh) {
            for (int64_t ow = 0; ow < wo; ++ow) {
              const T* src = g + ((b * ho + oh) * wo + ow) * pw;
              for (int ki = 0; ki < kernel; ++ki) {
                const int64_t ih = oh * stride - pad + ki;
                if (ih < 0 || ih >= h) continue;
                for (int kj = 0; kj < kernel; ++kj) {
                  const int64_t iw = ow * stride - pad + kj;
                  if (iw < 0 || iw >= w) continue;
                  const T* s = src + (int64_t(ki) * kernel + kj) * c;
                  T* d = gx + ((b * h + ih) * w + iw) * c;
                  for (int64_t ch = 0; ch < c; ++ch) d[ch] += s[ch];
                }
              }
            }
          }
        }
      });
}

template <typename T>
Var<T> WindowedAttention(Var<T> q, Var<T> k, Var<T> v, int heads, int window,
                         Var<T> rel_bias) {
  RequireSameShape(q, k);
  RequireSameShape(q, v);
  GRWM_REQUIRE(q.value().rank() == 3, "attention expects [B,L,E]");
  GRWM_REQUIRE(heads >= 1 && window >= 1, "invalid heads/window");
  const int64_t nb = q.dim(0), len = q.dim(1), e = q.dim(2);
  GRWM_REQUIRE(e % heads == 0, "embedding width not divisible by heads");
  const int64_t dh = e / heads;
  const bool has_bias = rel_bias.valid();
  if (has_bias) {
    RequireSameTape(q, rel_bias);
    GRWM_REQUIRE(rel_bias.value().size() == int64_t(heads) * window,
                 "relative bias must have heads*window entries");
  }
  const T scale = T(1) / std::sqrt(T(dh));
  const T* qv = q.value().data();
  const T* kv = k.value().data();
  const T* vv = v.value().data();
  const T* bias = has_bias ? rel_bias.value().data() : nullptr;
  // probs[((b*heads + h)*len + i)*window + r] for key j = i - r.
  auto probs = std::make_shared<std::vector<T>>(nb * heads * len * window, T(0));
  Tensor<T> y({nb, len, e});
  std::vector<T> s(window);
  for (int64_t b = 0; b < nb; ++b) {
    for (int h = 0; h < heads; ++h) {
      for (int64_t i = 0; i < len; ++i) {
        const int64_t span = std::min<int64_t>(window, i + 1);
        const T* qi = qv + (b * len + i) * e + h * dh;
        T mx = -std::numeric_limits<T>::infinity();
        for (int64_t r = 0; r < span; ++r) {
          const T* kj = kv + (b * len + (i - r)) * e + h * dh;
          T dot = 0;
          for (int64_t d = 0; d < dh; ++d) dot += qi[d] * kj[d];
          s[r] = dot * scale + (bias ? bias[h * window + r] : T(0));
          mx = std::max(mx, s[r]);
        }
        T z = 0;
        for (int64_t r = 0; r < span; ++r) {
          s[r] = std::exp(s[r] - mx);
          z += s[r];
        }
        T* p = probs->data() + ((b * heads + h) * len + i) * window;
        T* yi = y.data() + (b * len + i) * e + h * dh;
        for (int64_t r = 0; r < span; ++r) {
          p[r] = s[r] / z;
          const T* vj = vv + (b * len + (i - r)) * e + h * dh;
          for (int64_t d = 0; d < dh; ++d) yi[d] += p[r] * vj[d];
        }
      }
    }
  }
  const int iq = q.id, ik = k.id, iv = v.id, irb = has_bias ? rel_bias.id : -1;
  std::vector<int> parents = {iq, ik, iv};
  if (has_bias) parents.push_back(irb);
  return q.tape->Record(
      "windowed_attention", std::move(y), std::move(parents),
      [=](Tape<T>& t, int self) {
        const T* g = t.grad(self).data();
        const T* qv = t.value(iq).data();
        const T* kv = t.value(ik).data();
        const T* vv = t.value(iv).data();
        T* gq = t.needs_grad(iq) ? t.grad(iq).data() : nullptr;
        T* gk = t.needs_grad(ik) ? t.grad(ik).data() : nullptr;
        T* gv = t.needs_grad(iv) ? t.grad(iv).data() : nullptr;
        T* gb = (irb >= 0 && t.needs_grad(irb)) ? t.grad(irb).data() : nullptr;
        std::vector<T> dp(window);
        for (int64_t b = 0; b < nb; ++b) {
          for (int h = 0; h < heads; ++h) {
            for (int64_t i = 0; i < len; ++i) {
              const int64_t span = std::min<int64_t>(window, i + 1);
              const T* p = probs->data() + ((b * heads + h) * len + i) * window;
              const T* gi = g + (b * len + i) * e + h * dh;
              T pdp = 0;
              for (int64_t r = 0; r < span; ++r) {
                const int64_t off = (b * len + (i - r)) * e + h * dh;
                T dot = 0;
                for (int64_t d = 0; d < dh; ++d) dot += gi[d] * vv[off + d];
                dp[r] = dot;
                pdp += p[r] * dot;
                if (gv) {
                  for (int64_t d = 0; d < dh; ++d) gv[off + d] += p[r] * gi[d];
                }
              }
              const int64_t qoff = (b * len + i) * e + h * dh;
              for (int64_t r = 0; r < span; ++r) {
                const T ds = p[r] * (dp[r] - pdp);
                const int64_t off = (b * len + (i - r)) * e + h * dh;
                if (gq) {
                  for (int64_t d = 0; d < dh; ++d) {
                    gq[qoff + d] += ds * scale * kv[off + d];
                  }
                }
                if (gk) {
                  for (int64_t d = 0; d < dh; ++d) {
                    gk[off + d] += ds * scale * qv[qoff + d];
                  }
                }
                if (gb) gb[h * window + r] += ds;
              }
            }
          }
        }
      });
}

#define GRWM_INSTANTIATE_OPS(T)                                              \
  template Var<T> Add<T>(Var<T>, Var<T>);                                    \
  template Var<T> Sub<T>(Var<T>, Var<T>);                                    \
  template Var<T> Mul<T>(Var<T>, Var<T>);                                    \
  template Var<T> Scale<T>(Var<T>, T);                                       \
  template Var<T> AddScalar<T>(Var<T>, T);                                   \
  template Var<T> Relu<T>(Var<T>);                                           \
  template Var<T> Tanh<T>(Var<T>);                                           \
  template Var<T> Sigmoid<T>(Var<T>);                                        \
  template Var<T> Exp<T>(Var<T>);                                            \
  template Var<T> Log<T>(Var<T>);                                            \
  template Var<T> Square<T>(Var<T>);                                         \
  template Var<T> Sqrt<T>(Var<T>);                                           \
  template Var<T> Clamp<T>(Var<T>, T, T);                                    \
  template Var<T> MatMul<T>(Var<T>, Var<T>);                                 \
  template Var<T> Affine<T>(Var<T>, Var<T>, Var<T>);                         \
  template Var<T> LayerNorm<T>(Var<T>, Var<T>, Var<T>, T);                   \
  template Var<T> L2Normalize<T>(Var<T>, T);                                 \
  template Var<T> Sum<T>(Var<T>);                                            \
  template Var<T> Mean<T>(Var<T>);                                           \
  template Var<T> Concat<T>(const std::vector<Var<T>>&, int);                \
  template Var<T> Slice<T>(Var<T>, int, int64_t, int64_t);                   \
  template Var<T> Reshape<T>(Var<T>, Shape);                                 \
  template Var<T> Patches<T>(Var<T>, int, int, int);                         \
  template Var<T> WindowedAttention<T>(Var<T>, Var<T>, Var<T>, int, int,     \
                                       Var<T>);

GRWM_INSTANTIATE_OPS(float)
GRWM_INSTANTIATE_OPS(double)

}  // namespace grwm::numcore::ops
