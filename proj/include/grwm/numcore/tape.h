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

#ifndef GRWM_NUMCORE_TAPE_H_
#define GRWM_NUMCORE_TAPE_H_

#include <deque>
#include <functional>
#include <string>
#include <vector>

#include "grwm/numcore/tensor.h"

namespace grwm::numcore {

template <typename T>
class Tape;

// A trainable array. Gradients accumulate across Backward() calls until the
// optimizer (or caller) clears them.
template <typename T>
struct Parameter {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;

  void ZeroGrad() {
    if (grad.size() != value.size()) grad = Tensor<T>(value.shape());
    grad.Fill(T(0));
  }
};

// Handle to a node on a tape.
template <typename T>
struct Var {
  Tape<T>* tape = nullptr;
  int id = -1;

  bool valid() const { return tape != nullptr && id >= 0; }
  const Tensor<T>& value() const { return tape->value(id); }
  const Shape& shape() const { return tape->value(id).shape(); }
  int64_t dim(int axis) const { return tape->value(id).dim(axis); }
  int64_t size() const { return tape->value(id).size(); }
};

// Reverse-mode tape. Nodes are appended in evaluation order, so a reverse
// sweep over node ids is a valid topological order for backpropagation.
template <typename T>
class Tape {
 public:
  // Reads grad(self) and accumulates into the parents' gradients.
  using BackwardFn = std::function<void(Tape&, int self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var<T> Constant(Tensor<T> value) {
    return Push("constant", std::move(value), {}, nullptr, false, nullptr);
  }
  // Differentiable leaf; gradient readable through grad().
  Var<T> Variable(Tensor<T> value) {
    return Push("variable", std::move(value), {}, nullptr, true, nullptr);
  }
  Var<T> Param(Parameter<T>& p) {
    return Push("parameter", p.value, {}, nullptr, true, &p);
  }

  // Appends the result of primitive `op`. Throws NumericFailure naming `op`
  // when the value contains NaN or Inf.
  Var<T> Record(const char* op, Tensor<T> value, std::vector<int> parents,
                BackwardFn backward) {
    bool needs = false;
    for (int p : parents) needs = needs || nodes_[p].needs_grad;
    return Push(op, std::move(value), std::move(parents),
                needs ? std::move(backward) : nullptr, needs, nullptr);
  }

  // Propagates d(root)/d(node) to every node; parameter gradients are added
  // into Parameter::grad.
  void Backward(Var<T> root) {
    GRWM_REQUIRE(root.tape == this, "root belongs to another tape");
    const Tensor<T>& v = nodes_[root.id].value;
    GRWM_REQUIRE(v.size() == 1, "objective must be scalar, got shape " +
                                    ShapeString(v.shape()));
    grad(root.id).Fill(T(1));
    for (int id = root.id; id >= 0; --id) {
      Node& n = nodes_[id];
      if (!n.needs_grad || n.grad.size() == 0) continue;
      if (n.backward) n.backward(*this, id);
      if (n.param != nullptr) {
        Parameter<T>& p = *n.param;
        if (p.grad.size() != p.value.size()) p.ZeroGrad();
        T* dst = p.grad.data();
        const T* src = n.grad.data();
        for (int64_t i = 0; i < n.grad.size(); ++i) dst[i] += src[i];
      }
    }
  }

  const Tensor<T>& value(int id) const { return nodes_[id].value; }
  const char* op(int id) const { return nodes_[id].op; }
  bool needs_grad(int id) const { return nodes_[id].needs_grad; }
  bool has_grad(int id) const { return nodes_[id].grad.size() > 0; }

  // Gradient buffer of a node, allocated as zeros on first access.
  Tensor<T>& grad(int id) {
    Node& n = nodes_[id];
    if (n.grad.size() != n.value.size()) n.grad = Tensor<T>(n.value.shape());
    return n.grad;
  }

  size_t size() const { return nodes_.size(); }
  void Clear() { nodes_.clear(); }

  void set_check_finite(bool on) { check_finite_ = on; }

 private:
  struct Node {
    const char* op;
    Tensor<T> value;
    Tensor<T> grad;
    std::vector<int> parents;
    BackwardFn backward;
    Parameter<T>* param;
    bool needs_grad;
  };

  Var<T> Push(const char* op, Tensor<T> value, std::vector<int> parents,
              BackwardFn backward, bool needs_grad, Parameter<T>* param) {
    if (check_finite_ && !value.AllFinite()) {
      throw NumericFailure(op, std::string("non-finite value produced by ") +
                                   op);
    }
    nodes_.push_back(Node{op, std::move(value), Tensor<T>(),
                          std::move(parents), std::move(backward), param,
                          needs_grad});
    return Var<T>{this, static_cast<int>(nodes_.size()) - 1};
  }

  std::deque<Node> nodes_;
  bool check_finite_ = true;
};

}  // namespace grwm::numcore

#endif  // GRWM_NUMCORE_TAPE_H_
