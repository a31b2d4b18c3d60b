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

#include "srdet/core/tensor.hpp"

#include <cmath>
#include <sstream>
#include <unordered_set>

namespace srdet {

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ')';
  return os.str();
}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> data, bool requires_grad) {
  if (shape.empty()) throw ShapeError("tensor shape must have at least one axis");
  for (std::size_t d : shape) {
    if (d == 0) throw ShapeError("tensor dimensions must be positive, got " + shape_str(shape));
  }
  if (shape_numel(shape) != data.size()) {
    throw ShapeError("shape " + shape_str(shape) + " does not match " +
                     std::to_string(data.size()) + " values");
  }
  node_ = std::make_shared<Node>();
  node_->shape = std::move(shape);
  node_->data = std::move(data);
  node_->requires_grad = requires_grad;
}

template <typename T>
Tensor<T> Tensor<T>::zeros(Shape shape, bool requires_grad) {
  return full(std::move(shape), T(0), requires_grad);
}

template <typename T>
Tensor<T> Tensor<T>::full(Shape shape, T value, bool requires_grad) {
  const std::size_t n = shape_numel(shape);
  return Tensor(std::move(shape), std::vector<T>(n, value), requires_grad);
}

template <typename T>
Tensor<T> Tensor<T>::scalar(T value, bool requires_grad) {
  return Tensor({1}, {value}, requires_grad);
}

template <typename T>
std::size_t Tensor<T>::dim(std::size_t axis) const {
  if (axis >= rank()) {
    throw ShapeError("axis " + std::to_string(axis) + " out of range for " + shape_str(shape()));
  }
  return node_->shape[axis];
}

template <typename T>
T Tensor<T>::item() const {
  if (numel() != 1) throw ContractError("item() on tensor of shape " + shape_str(shape()));
  return node_->data[0];
}

template <typename T>
T Tensor<T>::at(std::size_t c, std::size_t y, std::size_t x) const {
  const Shape& s = node_->shape;
  return node_->data[(c * s[1] + y) * s[2] + x];
}

template <typename T>
std::span<T> Tensor<T>::mutable_grad() {
  node_->ensure_grad();
  return node_->grad;
}

template <typename T>
bool Tensor<T>::all_finite() const {
  return !first_non_finite().has_value();
}

template <typename T>
std::optional<std::size_t> Tensor<T>::first_non_finite() const {
  for (std::size_t i = 0; i < node_->data.size(); ++i) {
    if (!std::isfinite(node_->data[i])) return i;
  }
  return std::nullopt;
}

template <typename T>
Tensor<T> Tensor<T>::detach() const {
  return Tensor(shape(), node_->data, false);
}

template <typename T>
Tensor<T> Tensor<T>::clone() const {
  return Tensor(shape(), node_->data, requires_grad());
}

template <typename T>
Tensor<T> Tensor<T>::reshaped(Shape shape) const {
  return Tensor(std::move(shape), node_->data, requires_grad());
}

template <typename T>
void Tape<T>::record(const char* op, std::vector<NodePtr> inputs, NodePtr output,
                     std::function<void()> backward) {
  records_.push_back(Record{op, std::move(inputs), std::move(output), std::move(backward)});
}

template <typename T>
std::optional<std::pair<std::string, std::size_t>> Tape<T>::first_non_finite_op() const {
  for (std::size_t i = 0; i < records_.size(); ++i) {
    for (const T v : records_[i].output->data) {
      if (!std::isfinite(v)) return std::make_pair(std::string(records_[i].op), i);
    }
  }
  return std::nullopt;
}

template <typename T>
void backward(const Tensor<T>& loss, Tape<T>& tape) {
  if (!loss.defined() || loss.numel() != 1) {
    throw ContractError("backward() requires a scalar loss");
  }
  const auto& root = loss.node();
  bool reachable = false;
  for (auto& rec : tape.records_) {
    rec.output->grad.clear();
    if (rec.output == root) reachable = true;
  }
  if (!reachable && !root->requires_grad) {
    throw ContractError("loss was not produced by this tape");
  }
  root->grad.assign(1, T(1));
  tape.last_visits_ = 0;
  for (auto it = tape.records_.rbegin(); it != tape.records_.rend(); ++it) {
    if (!it->output->requires_grad || it->output->grad.empty()) continue;
    it->backward();
    ++tape.last_visits_;
  }
}

template class Tensor<float>;
template class Tensor<double>;
template class Tape<float>;
template class Tape<double>;
template void backward(const Tensor<float>&, Tape<float>&);
template void backward(const Tensor<double>&, Tape<double>&);

}  // namespace srdet
