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
#include <span>
#include <vector>

#include "srdet/core/tensor.hpp"

// Differentiable primitives. Every op takes an optional tape as its last
// argument; when a tape is given the op is recorded on it and gradients flow
// to any input that requires them. Without a tape the op is a plain forward
// computation.
namespace srdet::ops {

struct Conv2dParams {
  std::size_t stride = 1;
  std::size_t padding = 0;
};

// input [C,H,W], kernel [O,C,kH,kW], bias [O] -> [O,H',W'].
template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& kernel, const Tensor<T>& bias,
                 Conv2dParams params, Tape<T>* tape = nullptr);

// Output spatial extent of a convolution, or ShapeError when the kernel does
// not fit the padded input.
std::size_t conv_output_extent(std::size_t in, std::size_t kernel, std::size_t stride,
                               std::size_t padding);

enum class PointwiseFn { kLeakyRelu, kSigmoid, kExp, kLog, kSquare };

// `slope` is only read by kLeakyRelu.
template <typename T>
Tensor<T> pointwise(const Tensor<T>& x, PointwiseFn fn, double slope = 0.2,
                    Tape<T>* tape = nullptr);

template <typename T>
Tensor<T> leaky_relu(const Tensor<T>& x, double slope, Tape<T>* tape = nullptr) {
  return pointwise(x, PointwiseFn::kLeakyRelu, slope, tape);
}
template <typename T>
Tensor<T> sigmoid(const Tensor<T>& x, Tape<T>* tape = nullptr) {
  return pointwise(x, PointwiseFn::kSigmoid, 0.0, tape);
}
template <typename T>
Tensor<T> exp(const Tensor<T>& x, Tape<T>* tape = nullptr) {
  return pointwise(x, PointwiseFn::kExp, 0.0, tape);
}
// Throws DomainError carrying the flat index of the first non-positive value.
template <typename T>
Tensor<T> log(const Tensor<T>& x, Tape<T>* tape = nullptr) {
  return pointwise(x, PointwiseFn::kLog, 0.0, tape);
}
template <typename T>
Tensor<T> square(const Tensor<T>& x, Tape<T>* tape = nullptr) {
  return pointwise(x, PointwiseFn::kSquare, 0.0, tape);
}

// Hard clamp to [lo, hi]; gradient is 1 inside the closed interval, 0 outside.
template <typename T>
Tensor<T> clamp(const Tensor<T>& x, double lo, double hi, Tape<T>* tape = nullptr);

enum class ArithOp { kAdd, kSub, kMul };

// Elementwise binary op on equal shapes.
template <typename T>
Tensor<T> arith(const Tensor<T>& a, const Tensor<T>& b, ArithOp op, Tape<T>* tape = nullptr);

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b, Tape<T>* tape = nullptr) {
  return arith(a, b, ArithOp::kAdd, tape);
}
template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b, Tape<T>* tape = nullptr) {
  return arith(a, b, ArithOp::kSub, tape);
}
template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b, Tape<T>* tape = nullptr) {
  return arith(a, b, ArithOp::kMul, tape);
}

// a + s and a * s for a scalar s.
template <typename T>
Tensor<T> add_scalar(const Tensor<T>& a, double s, Tape<T>* tape = nullptr);
template <typename T>
Tensor<T> scale(const Tensor<T>& a, double s, Tape<T>* tape = nullptr);

enum class ReduceOp { kSum, kMean, kL1Norm };

// Full reduction to a shape-(1) tensor.
template <typename T>
Tensor<T> reduce(const Tensor<T>& x, ReduceOp op, Tape<T>* tape = nullptr);

template <typename T>
Tensor<T> sum(const Tensor<T>& x, Tape<T>* tape = nullptr) {
  return reduce(x, ReduceOp::kSum, tape);
}
template <typename T>
Tensor<T> mean(const Tensor<T>& x, Tape<T>* tape = nullptr) {
  return reduce(x, ReduceOp::kMean, tape);
}
template <typename T>
Tensor<T> l1norm(const Tensor<T>& x, Tape<T>* tape = nullptr) {
  return reduce(x, ReduceOp::kL1Norm, tape);
}

// [r*r*C, H, W] -> [C, r*H, r*W]; out[c, h*r+i, w*r+j] = in[c*r*r + i*r + j, h, w].
template <typename T>
Tensor<T> pixel_shuffle(const Tensor<T>& x, std::size_t r, Tape<T>* tape = nullptr);

// Exact inverse of pixel_shuffle.
template <typename T>
Tensor<T> pixel_unshuffle(const Tensor<T>& x, std::size_t r, Tape<T>* tape = nullptr);

// Concatenation along axis 0; trailing axes must agree.
template <typename T>
Tensor<T> concat(const std::vector<Tensor<T>>& parts, Tape<T>* tape = nullptr);

// Rows [begin, end) along axis 0.
template <typename T>
Tensor<T> slice(const Tensor<T>& x, std::size_t begin, std::size_t end, Tape<T>* tape = nullptr);

template <typename T>
Tensor<T> reshape(const Tensor<T>& x, Shape shape, Tape<T>* tape = nullptr);

// Flat-index gather into a rank-1 tensor of indices.size() elements.
template <typename T>
Tensor<T> gather(const Tensor<T>& x, std::span<const std::size_t> indices,
                 Tape<T>* tape = nullptr);

// Integer cell window [y0,y1) x [x0,x1) on a [C,H,W] map.
struct CellWindow {
  std::size_t y0 = 0, y1 = 0, x0 = 0, x1 = 0;
};

// Quantized max pooling of a window into [C,pool,pool]. Bin b along an axis
// covers [floor(start + b*len/pool), ceil(start + (b+1)*len/pool)); an empty
// bin yields 0. Gradient routes to the first maximal element of each bin.
template <typename T>
Tensor<T> window_max_pool(const Tensor<T>& features, CellWindow window, std::size_t pool,
                          Tape<T>* tape = nullptr);

// Mean over elements of binary cross-entropy between sigmoid(logits) and
// targets in [0,1], computed in the stable log-sum-exp form.
template <typename T>
Tensor<T> bce_with_logits(const Tensor<T>& logits, const Tensor<T>& targets,
                          Tape<T>* tape = nullptr);

// -log softmax(logits)[target] for a rank-1 logit vector.
template <typename T>
Tensor<T> cross_entropy(const Tensor<T>& logits, std::size_t target, Tape<T>* tape = nullptr);

// Sum of smooth-L1 (Huber with transition `beta`) between pred and target.
template <typename T>
Tensor<T> smooth_l1(const Tensor<T>& pred, const Tensor<T>& target, double beta,
                    Tape<T>* tape = nullptr);

// Numerically stable softmax of a rank-1 vector (forward only).
template <typename T>
std::vector<T> softmax(std::span<const T> logits);

}  // namespace srdet::ops
