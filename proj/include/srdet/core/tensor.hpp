// Copyright 2026 The srdet Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "srdet/core/errors.hpp"

namespace srdet {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

template <typename T>
class Tape;

namespace detail {

template <typename T>
struct TensorNode {
  Shape shape;
  std::vector<T> data;
  std::vector<T> grad;  // empty until something accumulates into it
  bool requires_grad = false;

  void ensure_grad() {
    if (grad.empty()) grad.assign(data.size(), T(0));
  }
};

}  // namespace detail

// Dense row-major tensor with an optional gradient buffer.
//
// A Tensor is a shared handle: copies alias the same storage, which is how
// parameters are shared between a network and its optimizer. Use clone() or
// detach() for an independent copy.
template <typename T>
class Tensor {
 public:
  using value_type = T;
  using Node = detail::TensorNode<T>;

  Tensor() = default;
  Tensor(Shape shape, std::vector<T> data, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, T value, bool requires_grad = false);
  static Tensor scalar(T value, bool requires_grad = false);

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t numel() const { return node_->data.size(); }

  std::span<const T> data() const { return node_->data; }
  // Writable view for parameter updates and initialization.
  std::span<T> mutable_data() { return node_->data; }

  T item() const;
  // Element access for rank-3 (channel, row, column) tensors.
  T at(std::size_t c, std::size_t y, std::size_t x) const;

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool value) { node_->requires_grad = value; }
  bool has_grad() const { return !node_->grad.empty(); }
  std::span<const T> grad() const { return node_->grad; }
  std::span<T> mutable_grad();
  void zero_grad() { node_->grad.clear(); }

  bool all_finite() const;
  std::optional<std::size_t> first_non_finite() const;

  // Deep copy that shares nothing and never requires grad.
  Tensor detach() const;
  // Deep copy preserving requires_grad (gradient not copied).
  Tensor clone() const;
  Tensor reshaped(Shape shape) const;

  template <typename U>
  Tensor<U> cast() const {
    std::vector<U> out(numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<U>(node_->data[i]);
    return Tensor<U>(shape(), std::move(out), requires_grad());
  }

  bool same_storage(const Tensor& other) const { return node_ == other.node_; }

  // Autodiff plumbing; not part of the numeric API.
  const std::shared_ptr<Node>& node() const { return node_; }
  static Tensor from_node(std::shared_ptr<Node> node) {
    Tensor t;
    t.node_ = std::move(node);
    return t;
  }

 private:
  std::shared_ptr<Node> node_;
};

// Ordered record of differentiable operations. Every op appends itself after
// its inputs exist, so the record list is already in topological order and a
// reverse sweep visits each op exactly once.
//
// A tape is confined to one thread and is meant for a single backward pass.
template <typename T>
class Tape {
 public:
  using NodePtr = std::shared_ptr<detail::TensorNode<T>>;

  struct Record {
    const char* op;
    std::vector<NodePtr> inputs;
    NodePtr output;
    std::function<void()> backward;
  };

  void record(const char* op, std::vector<NodePtr> inputs, NodePtr output,
              std::function<void()> backward);

  std::size_t size() const { return records_.size(); }
  const std::vector<Record>& records() const { return records_; }
  void clear() { records_.clear(); }

  // Name and position of the first recorded op whose output holds a NaN/Inf.
  std::optional<std::pair<std::string, std::size_t>> first_non_finite_op() const;

  // Number of backward rules executed by the last backward().
  std::size_t last_backward_visits() const { return last_visits_; }

 private:
  template <typename U>
  friend void backward(const Tensor<U>& loss, Tape<U>& tape);

  std::vector<Record> records_;
  std::size_t last_visits_ = 0;
};

// Seeds d(loss)/d(loss) = 1 and sweeps the tape in reverse. Gradients of
// leaf tensors accumulate across calls; intermediate gradients are reset at
// the start of each call.
template <typename T>
void backward(const Tensor<T>& loss, Tape<T>& tape);

}  // namespace srdet
