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

#ifndef GRWM_NUMCORE_LAYERS_H_
#define GRWM_NUMCORE_LAYERS_H_

#include "grwm/numcore/ops.h"
#include "grwm/numcore/params.h"

namespace grwm::numcore {

template <typename T>
Var<T> Apply(Tape<T>& tape, const Linear<T>& l, Var<T> x) {
  Var<T> w = tape.Param(*l.weight);
  Var<T> b = l.bias ? tape.Param(*l.bias) : Var<T>{};
  return ops::Affine(x, w, b);
}

template <typename T>
Var<T> Apply(Tape<T>& tape, const LayerNormParams<T>& ln, Var<T> x) {
  return ops::LayerNorm(x, tape.Param(*ln.gain), tape.Param(*ln.bias));
}

}  // namespace grwm::numcore

#endif  // GRWM_NUMCORE_LAYERS_H_
