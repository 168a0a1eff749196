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

#ifndef GRWM_NUMCORE_TENSOR_H_
#define GRWM_NUMCORE_TENSOR_H_

#include <cmath>
#include <cstdint>
#include <new>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "grwm/common/errors.h"

namespace grwm::numcore {

using Shape = std::vector<int64_t>;

inline int64_t NumElements(const Shape& shape) {
  int64_t n = 1;
  for (int64_t e : shape) n *= e;
  return n;
}

inline std::string ShapeString(const Shape& shape) {
  std::string s = "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

// Every buffer starts on a 64-byte boundary. Vectorized kernels peel a
// different number of leading elements depending on alignment, so without
// this the rounding of a reduction would depend on where malloc put the data.
template <typename T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlignment{64};

  AlignedAllocator() = default;
  template <typename U>
  AlignedAllocator(const AlignedAllocator<U>&) {}

  T* allocate(size_t n) {
    return static_cast<T*>(::operator new(n * sizeof(T), kAlignment));
  }
  void deallocate(T* p, size_t) { ::operator delete(p, kAlignment); }
  template <typename U>
  bool operator==(const AlignedAllocator<U>&) const {
    return true;
  }
};

// Dense row-major array. The element count always equals the product of the
// extents; a rank-0 tensor holds one element.
template <typename T>
class Tensor {
 public:
  using value_type = T;
  using Storage = std::vector<T, AlignedAllocator<T>>;

  Tensor() = default;
  explicit Tensor(Shape shape, T fill = T(0))
      : shape_(std::move(shape)), values_(NumElements(shape_), fill) {
    for (int64_t e : shape_) GRWM_REQUIRE(e >= 0, "negative extent");
  }
  Tensor(Shape shape, Storage values)
      : shape_(std::move(shape)), values_(std::move(values)) {
    GRWM_REQUIRE(NumElements(shape_) == static_cast<int64_t>(values_.size()),
                 "element count does not match shape " + ShapeString(shape_));
  }
  Tensor(Shape shape, const std::vector<T>& values)
      : Tensor(std::move(shape), Storage(values.begin(), values.end())) {}

  static Tensor Scalar(T v) { return Tensor(Shape{}, Storage{v}); }

  const Shape& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int64_t dim(int axis) const {
    if (axis < 0) axis += rank();
    GRWM_REQUIRE(axis >= 0 && axis < rank(), "axis out of range");
    return shape_[axis];
  }
  int64_t size() const { return static_cast<int64_t>(values_.size()); }
  bool empty() const { return values_.empty() && shape_.empty(); }

  T* data() { return values_.data(); }
  const T* data() const { return values_.data(); }
  std::span<T> values() { return values_; }
  std::span<const T> values() const { return values_; }

  Storage& storage() { return values_; }
  const Storage& storage() const { return values_; }

  bool operator==(const Tensor&) const = default;

  T& operator[](int64_t i) { return values_[i]; }
  const T& operator[](int64_t i) const { return values_[i]; }

  T item() const {
    GRWM_REQUIRE(values_.size() == 1, "item() on non-scalar tensor");
    return values_[0];
  }

  Tensor Reshape(Shape shape) const& {
    Tensor out = *this;
    return std::move(out).Reshape(std::move(shape));
  }
  Tensor Reshape(Shape shape) && {
    GRWM_REQUIRE(NumElements(shape) == size(),
                 "cannot reshape " + ShapeString(shape_) + " to " +
                     ShapeString(shape));
    shape_ = std::move(shape);
    return std::move(*this);
  }

  void Fill(T v) { std::fill(values_.begin(), values_.end(), v); }

  bool AllFinite() const {
    for (T v : values_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  template <typename U>
  Tensor<U> Cast() const {
    return Tensor<U>(shape_, typename Tensor<U>::Storage(values_.begin(),
                                                          values_.end()));
  }

 private:
  Shape shape_;
  Storage values_;
};

}  // namespace grwm::numcore

#endif  // GRWM_NUMCORE_TENSOR_H_
