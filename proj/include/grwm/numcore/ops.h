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

#ifndef GRWM_NUMCORE_OPS_H_
#define GRWM_NUMCORE_OPS_H_

#include <vector>

#include "grwm/numcore/tape.h"

// Differentiable primitives. Every function records one node on the tape of
// its first argument. Shapes are checked eagerly and mismatches raise
// ContractViolation.
namespace grwm::numcore::ops {

// Elementwise, identical shapes.
template <typename T> Var<T> Add(Var<T> a, Var<T> b);
template <typename T> Var<T> Sub(Var<T> a, Var<T> b);
template <typename T> Var<T> Mul(Var<T> a, Var<T> b);
template <typename T> Var<T> Scale(Var<T> a, T s);
template <typename T> Var<T> AddScalar(Var<T> a, T s);

// Pointwise nonlinearities.
template <typename T> Var<T> Relu(Var<T> x);
template <typename T> Var<T> Tanh(Var<T> x);
template <typename T> Var<T> Sigmoid(Var<T> x);
template <typename T> Var<T> Exp(Var<T> x);
template <typename T> Var<T> Log(Var<T> x);
template <typename T> Var<T> Square(Var<T> x);
template <typename T> Var<T> Sqrt(Var<T> x);
// Gradient is zero where the input lies outside [lo, hi].
template <typename T> Var<T> Clamp(Var<T> x, T lo, T hi);

// [M,K] x [K,N] -> [M,N].
template <typename T> Var<T> MatMul(Var<T> a, Var<T> b);
// x[..., K] * w[K, N] + b[N] -> [..., N]. `b` may be an invalid Var.
template <typename T> Var<T> Affine(Var<T> x, Var<T> w, Var<T> b);

// Normalizes the last axis to zero mean / unit variance, then applies the
// per-feature gain and bias.
template <typename T>
Var<T> LayerNorm(Var<T> x, Var<T> gain, Var<T> bias, T eps = T(1e-5));
// Rows of the last axis divided by sqrt(|row|^2 + eps).
template <typename T> Var<T> L2Normalize(Var<T> x, T eps = T(1e-12));

template <typename T> Var<T> Sum(Var<T> x);
template <typename T> Var<T> Mean(Var<T> x);

template <typename T> Var<T> Concat(const std::vector<Var<T>>& xs, int axis);
template <typename T>
Var<T> Slice(Var<T> x, int axis, int64_t start, int64_t length);
template <typename T> Var<T> Reshape(Var<T> x, Shape shape);

// Patch extraction for convolution: x[N,H,W,C] -> [N,Ho,Wo,kernel*kernel*C]
// with zero padding. A convolution is Patches followed by Affine.
template <typename T>
Var<T> Patches(Var<T> x, int kernel, int stride, int pad);

// Multi-head scaled dot-product attention over q,k,v of shape [B,L,E].
// Position i attends to j with i-window < j <= i; masked positions are
// skipped outright, so they have exactly no influence on the output.
// `rel_bias` (optional, shape [heads, window]) adds a learned score offset
// per head and relative distance i-j.
template <typename T>
Var<T> WindowedAttention(Var<T> q, Var<T> k, Var<T> v, int heads, int window,
                         Var<T> rel_bias);

}  // namespace grwm::numcore::ops

#endif  // GRWM_NUMCORE_OPS_H_
