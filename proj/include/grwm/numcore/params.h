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

#ifndef GRWM_NUMCORE_PARAMS_H_
#define GRWM_NUMCORE_PARAMS_H_

#include <cmath>
#include <deque>
#include <string>
#include <vector>

#include "grwm/numcore/rng.h"
#include "grwm/numcore/tape.h"

namespace grwm::numcore {

// Named array as stored in checkpoints (always 32-bit on disk).
struct NamedArray {
  std::string name;
  Shape shape;
  std::vector<float> values;

  bool operator==(const NamedArray&) const = default;
};

// Owns the parameters of a model. Addresses are stable, so layers may keep
// raw pointers into the set.
template <typename T>
class ParamSet {
 public:
  ParamSet() = default;
  ParamSet(const ParamSet&) = delete;
  ParamSet& operator=(const ParamSet&) = delete;

  Parameter<T>* Add(std::string name, Shape shape, T fill = T(0)) {
    for (const Parameter<T>& p : params_) {
      GRWM_REQUIRE(p.name != name, "duplicate parameter name " + name);
    }
    params_.push_back(Parameter<T>{std::move(name), Tensor<T>(shape, fill),
                                   Tensor<T>(shape)});
    return &params_.back();
  }

  // Uniform(-bound, bound) with bound = gain * sqrt(3 / fan_in).
  Parameter<T>* AddUniform(std::string name, Shape shape, int64_t fan_in,
                           RandomStream& rng, double gain = 1.0) {
    Parameter<T>* p = Add(std::move(name), std::move(shape));
    const double bound = gain * std::sqrt(3.0 / double(fan_in));
    for (T& v : p->value.values()) v = T((2.0 * rng.Uniform() - 1.0) * bound);
    return p;
  }

  std::deque<Parameter<T>>& all() { return params_; }
  const std::deque<Parameter<T>>& all() const { return params_; }

  Parameter<T>* Find(const std::string& name) {
    for (Parameter<T>& p : params_) {
      if (p.name == name) return &p;
    }
    return nullptr;
  }

  int64_t NumScalars() const {
    int64_t n = 0;
    for (const Parameter<T>& p : params_) n += p.value.size();
    return n;
  }

  void ZeroGrad() {
    for (Parameter<T>& p : params_) p.ZeroGrad();
  }

  std::vector<NamedArray> Export(const std::string& prefix = "") const {
    std::vector<NamedArray> out;
    for (const Parameter<T>& p : params_) {
      out.push_back({prefix + p.name, p.value.shape(),
                     std::vector<float>(p.value.values().begin(),
                                        p.value.values().end())});
    }
    return out;
  }

  // Loads every parameter by name; missing names or shape mismatches throw.
  void Import(const std::vector<NamedArray>& arrays,
              const std::string& prefix = "") {
    for (Parameter<T>& p : params_) {
      const NamedArray* found = nullptr;
      for (const NamedArray& a : arrays) {
        if (a.name == prefix + p.name) found = &a;
      }
      if (found == nullptr) {
        throw FormatError(FormatErrorKind::kConfigMismatch,
                          "checkpoint lacks parameter " + prefix + p.name);
      }
      if (found->shape != p.value.shape()) {
        throw FormatError(FormatErrorKind::kConfigMismatch,
                          "shape mismatch for " + p.name + ": " +
                              ShapeString(found->shape) + " vs " +
                              ShapeString(p.value.shape()));
      }
      for (int64_t i = 0; i < p.value.size(); ++i) {
        p.value[i] = T(found->values[i]);
      }
    }
  }

 private:
  std::deque<Parameter<T>> params_;
};

// Dense layer over the last axis.
template <typename T>
struct Linear {
  Parameter<T>* weight = nullptr;
  Parameter<T>* bias = nullptr;

  static Linear Create(ParamSet<T>& ps, const std::string& name, int64_t in,
                       int64_t out, RandomStream& rng, bool with_bias = true,
                       double gain = 1.0) {
    Linear l;
    l.weight = ps.AddUniform(name + ".w", {in, out}, in, rng, gain);
    if (with_bias) l.bias = ps.Add(name + ".b", {out});
    return l;
  }

  int64_t in() const { return weight->value.dim(0); }
  int64_t out() const { return weight->value.dim(1); }
};

template <typename T>
struct LayerNormParams {
  Parameter<T>* gain = nullptr;
  Parameter<T>* bias = nullptr;

  static LayerNormParams Create(ParamSet<T>& ps, const std::string& name,
                                int64_t width) {
    return {ps.Add(name + ".g", {width}, T(1)), ps.Add(name + ".b", {width})};
  }
};

}  // namespace grwm::numcore

#endif  // GRWM_NUMCORE_PARAMS_H_
