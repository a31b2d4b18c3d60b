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

#include "srdet/core/ops.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace srdet::ops {
namespace {

template <typename T>
using NodePtr = std::shared_ptr<detail::TensorNode<T>>;

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename T>
bool any_requires_grad(std::initializer_list<const Tensor<T>*> inputs) {
  for (const Tensor<T>* t : inputs) {
    if (t->requires_grad()) return true;
  }
  return false;
}

// Registers the op on the tape (if any). Every op is recorded so a non-finite
// output can be traced to the op that produced it; the backward rule only
// runs when the output requires grad.
template <typename T, typename F>
void record(Tape<T>* tape, const char* name, std::vector<NodePtr<T>> inputs,
            const Tensor<T>& out, F&& backward_fn) {
  if (tape == nullptr) return;
  tape->record(name, std::move(inputs), out.node(), std::forward<F>(backward_fn));
}

template <typename T>
void require_defined(const Tensor<T>& t, const char* op) {
  if (!t.defined()) throw ContractError(std::string(op) + ": undefined tensor");
}

template <typename T>
void require_rank3(const Tensor<T>& t, const char* op) {
  require_defined(t, op);
  if (t.rank() != 3) {
    throw ShapeError(std::string(op) + ": expected [C,H,W], got " + shape_str(t.shape()));
  }
}

template <typename T>
void im2col(std::span<const T> in, std::size_t c_in, std::size_t h, std::size_t w,
            std::size_t kh, std::size_t kw, std::size_t stride, std::size_t pad,
            std::size_t ho, std::size_t wo, std::vector<T>& col) {
  col.assign(c_in * kh * kw * ho * wo, T(0));
  std::size_t row = 0;
  for (std::size_t c = 0; c < c_in; ++c) {
    for (std::size_t ky = 0; ky < kh; ++ky) {
      for (std::size_t kx = 0; kx < kw; ++kx, ++row) {
        T* dst = col.data() + row * ho * wo;
        for (std::size_t oy = 0; oy < ho; ++oy) {
          const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * stride + ky) -
                                    static_cast<std::ptrdiff_t>(pad);
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
          const T* src = in.data() + (c * h + static_cast<std::size_t>(iy)) * w;
          for (std::size_t ox = 0; ox < wo; ++ox) {
            const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * stride + kx) -
                                      static_cast<std::ptrdiff_t>(pad);
            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(w)) continue;
            dst[oy * wo + ox] = src[ix];
          }
        }
      }
    }
  }
}

template <typename T>
void col2im_add(const std::vector<T>& col, std::size_t c_in, std::size_t h, std::size_t w,
                std::size_t kh, std::size_t kw, std::size_t stride, std::size_t pad,
                std::size_t ho, std::size_t wo, std::vector<T>& out) {
  std::size_t row = 0;
  for (std::size_t c = 0; c < c_in; ++c) {
    for (std::size_t ky = 0; ky < kh; ++ky) {
      for (std::size_t kx = 0; kx < kw; ++kx, ++row) {
        const T* src = col.data() + row * ho * wo;
        for (std::size_t oy = 0; oy < ho; ++oy) {
          const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * stride + ky) -
                                    static_cast<std::ptrdiff_t>(pad);
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h)) continue;
          T* dst = out.data() + (c * h + static_cast<std::size_t>(iy)) * w;
          for (std::size_t ox = 0; ox < wo; ++ox) {
            const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * stride + kx) -
                                      static_cast<std::ptrdiff_t>(pad);
            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(w)) continue;
            dst[ix] += src[oy * wo + ox];
          }
        }
      }
    }
  }
}

template <typename T>
T sigmoid_scalar(T x) {
  if (x >= T(0)) return T(1) / (T(1) + std::exp(-x));
  const T e = std::exp(x);
  return e / (T(1) + e);
}

const char* pointwise_name(PointwiseFn fn) {
  switch (fn) {
    case PointwiseFn::kLeakyRelu: return "leaky_relu";
    case PointwiseFn::kSigmoid: return "sigmoid";
    case PointwiseFn::kExp: return "exp";
    case PointwiseFn::kLog: return "log";
    case PointwiseFn::kSquare: return "square";
  }
  return "pointwise";
}

}  // namespace

std::size_t conv_output_extent(std::size_t in, std::size_t kernel, std::size_t stride,
                               std::size_t padding) {
  if (stride == 0) throw ShapeError("conv2d: stride must be positive");
  if (kernel > in + 2 * padding) {
    throw ShapeError("conv2d: kernel extent " + std::to_string(kernel) +
                     " exceeds padded input extent " + std::to_string(in + 2 * padding));
  }
  return (in + 2 * padding - kernel) / stride + 1;
}

template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& kernel, const Tensor<T>& bias,
                 Conv2dParams params, Tape<T>* tape) {
  require_rank3(input, "conv2d");
  require_defined(kernel, "conv2d");
  require_defined(bias, "conv2d");
  if (kernel.rank() != 4) {
    throw ShapeError("conv2d: kernel must be [O,C,kH,kW], got " + shape_str(kernel.shape()));
  }
  const std::size_t c_in = input.dim(0), h = input.dim(1), w = input.dim(2);
  const std::size_t c_out = kernel.dim(0), kh = kernel.dim(2), kw = kernel.dim(3);
  if (kernel.dim(1) != c_in) {
    throw ShapeError("conv2d: kernel expects " + std::to_string(kernel.dim(1)) +
                     " input channels, input has " + std::to_string(c_in));
  }
  if (bias.numel() != c_out) {
    throw ShapeError("conv2d: bias has " + std::to_string(bias.numel()) + " values for " +
                     std::to_string(c_out) + " output channels");
  }
  const std::size_t ho = conv_output_extent(h, kh, params.stride, params.padding);
  const std::size_t wo = conv_output_extent(w, kw, params.stride, params.padding);
  const std::size_t ck = c_in * kh * kw;
  const std::size_t hw = ho * wo;

  std::vector<T> col;
  im2col(input.data(), c_in, h, w, kh, kw, params.stride, params.padding, ho, wo, col);

  std::vector<T> out_data(c_out * hw);
  {
    Eigen::Map<const RowMat<T>> wmat(kernel.data().data(), c_out, ck);
    Eigen::Map<const RowMat<T>> cmat(col.data(), ck, hw);
    Eigen::Map<RowMat<T>> omat(out_data.data(), c_out, hw);
    omat.noalias() = wmat * cmat;
    for (std::size_t o = 0; o < c_out; ++o) omat.row(o).array() += bias.data()[o];
  }

  Tensor<T> out({c_out, ho, wo}, std::move(out_data),
                any_requires_grad<T>({&input, &kernel, &bias}));
  NodePtr<T> in_n = input.node(), k_n = kernel.node(), b_n = bias.node(), o_n = out.node();
  record(tape, "conv2d", {in_n, k_n, b_n}, out, [=]() {
    Eigen::Map<const RowMat<T>> gout(o_n->grad.data(), c_out, hw);
    if (k_n->requires_grad || in_n->requires_grad) {
      std::vector<T> col_b;
      im2col<T>(in_n->data, c_in, h, w, kh, kw, params.stride, params.padding, ho, wo, col_b);
      if (k_n->requires_grad) {
        k_n->ensure_grad();
        Eigen::Map<const RowMat<T>> cmat(col_b.data(), ck, hw);
        Eigen::Map<RowMat<T>> gw(k_n->grad.data(), c_out, ck);
        gw.noalias() += gout * cmat.transpose();
      }
      if (in_n->requires_grad) {
        in_n->ensure_grad();
        Eigen::Map<const RowMat<T>> wmat(k_n->data.data(), c_out, ck);
        std::vector<T> gcol(ck * hw);
        Eigen::Map<RowMat<T>> gc(gcol.data(), ck, hw);
        gc.noalias() = wmat.transpose() * gout;
        col2im_add(gcol, c_in, h, w, kh, kw, params.stride, params.padding, ho, wo, in_n->grad);
      }
    }
    if (b_n->requires_grad) {
      b_n->ensure_grad();
      for (std::size_t o = 0; o < c_out; ++o) b_n->grad[o] += gout.row(o).sum();
    }
  });
  return out;
}

template <typename T>
Tensor<T> pointwise(const Tensor<T>& x, PointwiseFn fn, double slope, Tape<T>* tape) {
  require_defined(x, "pointwise");
  const auto in = x.data();
  std::vector<T> y(in.size());
  const T s = static_cast<T>(slope);
  switch (fn) {
    case PointwiseFn::kLeakyRelu:
      for (std::size_t i = 0; i < in.size(); ++i) y[i] = in[i] > T(0) ? in[i] : s * in[i];
      break;
    case PointwiseFn::kSigmoid:
      for (std::size_t i = 0; i < in.size(); ++i) y[i] = sigmoid_scalar(in[i]);
      break;
    case PointwiseFn::kExp:
      for (std::size_t i = 0; i < in.size(); ++i) y[i] = std::exp(in[i]);
      break;
    case PointwiseFn::kLog:
      for (std::size_t i = 0; i < in.size(); ++i) {
        if (!(in[i] > T(0))) {
          throw DomainError("log: non-positive input " + std::to_string(in[i]) + " at index " +
                                std::to_string(i),
                            i);
        }
        y[i] = std::log(in[i]);
      }
      break;
    case PointwiseFn::kSquare:
      for (std::size_t i = 0; i < in.size(); ++i) y[i] = in[i] * in[i];
      break;
  }
  Tensor<T> out(x.shape(), std::move(y), x.requires_grad());
  NodePtr<T> x_n = x.node(), o_n = out.node();
  record(tape, pointwise_name(fn), {x_n}, out, [=]() {
    if (!x_n->requires_grad) return;
    x_n->ensure_grad();
    const auto& xd = x_n->data;
    const auto& yd = o_n->data;
    const auto& g = o_n->grad;
    auto& gx = x_n->grad;
    switch (fn) {
      case PointwiseFn::kLeakyRelu:
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += xd[i] > T(0) ? g[i] : s * g[i];
        break;
      case PointwiseFn::kSigmoid:
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * yd[i] * (T(1) - yd[i]);
        break;
      case PointwiseFn::kExp:
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * yd[i];
        break;
      case PointwiseFn::kLog:
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] / xd[i];
        break;
      case PointwiseFn::kSquare:
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * T(2) * xd[i];
        break;
    }
  });
  return out;
}

template <typename T>
Tensor<T> clamp(const Tensor<T>& x, double lo, double hi, Tape<T>* tape) {
  require_defined(x, "clamp");
  if (!(lo <= hi)) throw ContractError("clamp: lo must not exceed hi");
  const T l = static_cast<T>(lo), h = static_cast<T>(hi);
  const auto in = x.data();
  std::vector<T> y(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) y[i] = std::min(std::max(in[i], l), h);
  Tensor<T> out(x.shape(), std::move(y), x.requires_grad());
  NodePtr<T> x_n = x.node(), o_n = out.node();
  record(tape, "clamp", {x_n}, out, [=]() {
    if (!x_n->requires_grad) return;
    x_n->ensure_grad();
    for (std::size_t i = 0; i < o_n->grad.size(); ++i) {
      const T v = x_n->data[i];
      if (v >= l && v <= h) x_n->grad[i] += o_n->grad[i];
    }
  });
  return out;
}

template <typename T>
Tensor<T> arith(const Tensor<T>& a, const Tensor<T>& b, ArithOp op, Tape<T>* tape) {
  require_defined(a, "arith");
  require_defined(b, "arith");
  if (a.shape() != b.shape()) {
    throw ShapeError("arith: shape mismatch " + shape_str(a.shape()) + " vs " +
                     shape_str(b.shape()));
  }
  const auto ad = a.data(), bd = b.data();
  std::vector<T> y(ad.size());
  switch (op) {
    case ArithOp::kAdd:
      for (std::size_t i = 0; i < y.size(); ++i) y[i] = ad[i] + bd[i];
      break;
    case ArithOp::kSub:
      for (std::size_t i = 0; i < y.size(); ++i) y[i] = ad[i] - bd[i];
      break;
    case ArithOp::kMul:
      for (std::size_t i = 0; i < y.size(); ++i) y[i] = ad[i] * bd[i];
      break;
  }
  Tensor<T> out(a.shape(), std::move(y), any_requires_grad<T>({&a, &b}));
  NodePtr<T> a_n = a.node(), b_n = b.node(), o_n = out.node();
  const char* name = op == ArithOp::kAdd ? "add" : op == ArithOp::kSub ? "sub" : "mul";
  record(tape, name, {a_n, b_n}, out, [=]() {
    const auto& g = o_n->grad;
    if (a_n->requires_grad) {
      a_n->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) {
        a_n->grad[i] += op == ArithOp::kMul ? g[i] * b_n->data[i] : g[i];
      }
    }
    if (b_n->requires_grad) {
      b_n->ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) {
        switch (op) {
          case ArithOp::kAdd: b_n->grad[i] += g[i]; break;
          case ArithOp::kSub: b_n->grad[i] -= g[i]; break;
          case ArithOp::kMul: b_n->grad[i] += g[i] * a_n->data[i]; break;
        }
      }
    }
  });
  return out;
}

template <typename T>
Tensor<T> add_scalar(const Tensor<T>& a, double s, Tape<T>* tape) {
  require_defined(a, "add_scalar");
  const T v = static_cast<T>(s);
  std::vector<T> y(a.data().begin(), a.data().end());
  for (T& e : y) e += v;
  Tensor<T> out(a.shape(), std::move(y), a.requires_grad());
  NodePtr<T> a_n = a.node(), o_n = out.node();
  record(tape, "add_scalar", {a_n}, out, [=]() {
    if (!a_n->requires_grad) return;
    a_n->ensure_grad();
    for (std::size_t i = 0; i < o_n->grad.size(); ++i) a_n->grad[i] += o_n->grad[i];
  });
  return out;
}

template <typename T>
Tensor<T> scale(const Tensor<T>& a, double s, Tape<T>* tape) {
  require_defined(a, "scale");
  const T v = static_cast<T>(s);
  std::vector<T> y(a.data().begin(), a.data().end());
  for (T& e : y) e *= v;
  Tensor<T> out(a.shape(), std::move(y), a.requires_grad());
  NodePtr<T> a_n = a.node(), o_n = out.node();
  record(tape, "scale", {a_n}, out, [=]() {
    if (!a_n->requires_grad) return;
    a_n->ensure_grad();
    for (std::size_t i = 0; i < o_n->grad.size(); ++i) a_n->grad[i] += v * o_n->grad[i];
  });
  return out;
}

template <typename T>
Tensor<T> reduce(const Tensor<T>& x, ReduceOp op, Tape<T>* tape) {
  if (!x.defined() || x.numel() == 0) throw DomainError("reduce: empty tensor");
  const auto d = x.data();
  T acc = T(0);
  switch (op) {
    case ReduceOp::kSum:
    case ReduceOp::kMean:
      for (const T v : d) acc += v;
      if (op == ReduceOp::kMean) acc /= static_cast<T>(d.size());
      break;
    case ReduceOp::kL1Norm:
      for (const T v : d) acc += std::abs(v);
      break;
  }
  Tensor<T> out({1}, {acc}, x.requires_grad());
  NodePtr<T> x_n = x.node(), o_n = out.node();
  const char* name = op == ReduceOp::kSum ? "sum" : op == ReduceOp::kMean ? "mean" : "l1norm";
  record(tape, name, {x_n}, out, [=]() {
    if (!x_n->requires_grad) return;
    x_n->ensure_grad();
    const T g = o_n->grad[0];
    const std::size_t n = x_n->data.size();
    switch (op) {
      case ReduceOp::kSum:
        for (std::size_t i = 0; i < n; ++i) x_n->grad[i] += g;
        break;
      case ReduceOp::kMean: {
        const T gm = g / static_cast<T>(n);
        for (std::size_t i = 0; i < n; ++i) x_n->grad[i] += gm;
        break;
      }
      case ReduceOp::kL1Norm:
        for (std::size_t i = 0; i < n; ++i) {
          const T v = x_n->data[i];
          x_n->grad[i] += v > T(0) ? g : v < T(0) ? -g : T(0);
        }
        break;
    }
  });
  return out;
}

namespace {

// Index map shared by shuffle and unshuffle: element i of the shuffled
// [C, rH, rW] tensor comes from element map[i] of the [r*r*C, H, W] tensor.
std::vector<std::size_t> shuffle_map(std::size_t c, std::size_t h, std::size_t w, std::size_t r) {
  std::vector<std::size_t> map(c * r * r * h * w);
  const std::size_t oh = h * r, ow = w * r;
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t y = 0; y < oh; ++y) {
      for (std::size_t x = 0; x < ow; ++x) {
        const std::size_t src_c = ch * r * r + (y % r) * r + (x % r);
        map[(ch * oh + y) * ow + x] = (src_c * h + y / r) * w + x / r;
      }
    }
  }
  return map;
}

template <typename T>
Tensor<T> permute(const Tensor<T>& x, Shape out_shape, std::vector<std::size_t> src_of,
                  const char* name, Tape<T>* tape) {
  const auto d = x.data();
  std::vector<T> y(src_of.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = d[src_of[i]];
  Tensor<T> out(std::move(out_shape), std::move(y), x.requires_grad());
  NodePtr<T> x_n = x.node(), o_n = out.node();
  record(tape, name, {x_n}, out, [=, map = std::move(src_of)]() {
    if (!x_n->requires_grad) return;
    x_n->ensure_grad();
    for (std::size_t i = 0; i < map.size(); ++i) x_n->grad[map[i]] += o_n->grad[i];
  });
  return out;
}

}  // namespace

template <typename T>
Tensor<T> pixel_shuffle(const Tensor<T>& x, std::size_t r, Tape<T>* tape) {
  require_rank3(x, "pixel_shuffle");
  if (r == 0) throw ShapeError("pixel_shuffle: factor must be positive");
  const std::size_t cr = x.dim(0);
  if (cr % (r * r) != 0) {
    throw ShapeError("pixel_shuffle: " + std::to_string(cr) + " channels not divisible by " +
                     std::to_string(r * r));
  }
  const std::size_t c = cr / (r * r), h = x.dim(1), w = x.dim(2);
  return permute(x, {c, h * r, w * r}, shuffle_map(c, h, w, r), "pixel_shuffle", tape);
}

template <typename T>
Tensor<T> pixel_unshuffle(const Tensor<T>& x, std::size_t r, Tape<T>* tape) {
  require_rank3(x, "pixel_unshuffle");
  if (r == 0) throw ShapeError("pixel_unshuffle: factor must be positive");
  const std::size_t c = x.dim(0), oh = x.dim(1), ow = x.dim(2);
  if (oh % r != 0 || ow % r != 0) {
    throw ShapeError("pixel_unshuffle: spatial size not divisible by " + std::to_string(r));
  }
  const std::size_t h = oh / r, w = ow / r;
  const std::vector<std::size_t> fwd = shuffle_map(c, h, w, r);
  std::vector<std::size_t> inv(fwd.size());
  for (std::size_t i = 0; i < fwd.size(); ++i) inv[fwd[i]] = i;
  return permute(x, {c * r * r, h, w}, std::move(inv), "pixel_unshuffle", tape);
}

template <typename T>
Tensor<T> concat(const std::vector<Tensor<T>>& parts, Tape<T>* tape) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  Shape tail(parts[0].shape().begin() + 1, parts[0].shape().end());
  std::size_t lead = 0;
  bool rg = false;
  std::vector<NodePtr<T>> nodes;
  for (const auto& p : parts) {
    require_defined(p, "concat");
    Shape pt(p.shape().begin() + 1, p.shape().end());
    if (pt != tail) {
      throw ShapeError("concat: trailing shape mismatch " + shape_str(parts[0].shape()) + " vs " +
                       shape_str(p.shape()));
    }
    lead += p.dim(0);
    rg = rg || p.requires_grad();
    nodes.push_back(p.node());
  }
  std::vector<T> y;
  y.reserve(lead * shape_numel(tail));
  for (const auto& p : parts) y.insert(y.end(), p.data().begin(), p.data().end());
  Shape shape{lead};
  shape.insert(shape.end(), tail.begin(), tail.end());
  Tensor<T> out(std::move(shape), std::move(y), rg);
  NodePtr<T> o_n = out.node();
  record(tape, "concat", nodes, out, [=]() {
    std::size_t off = 0;
    for (const auto& n : nodes) {
      const std::size_t len = n->data.size();
      if (n->requires_grad) {
        n->ensure_grad();
        for (std::size_t i = 0; i < len; ++i) n->grad[i] += o_n->grad[off + i];
      }
      off += len;
    }
  });
  return out;
}

template <typename T>
Tensor<T> slice(const Tensor<T>& x, std::size_t begin, std::size_t end, Tape<T>* tape) {
  require_defined(x, "slice");
  if (begin >= end || end > x.dim(0)) {
    throw ShapeError("slice: range [" + std::to_string(begin) + "," + std::to_string(end) +
                     ") invalid for " + shape_str(x.shape()));
  }
  const std::size_t inner = x.numel() / x.dim(0);
  std::vector<T> y(x.data().begin() + begin * inner, x.data().begin() + end * inner);
  Shape shape = x.shape();
  shape[0] = end - begin;
  Tensor<T> out(std::move(shape), std::move(y), x.requires_grad());
  NodePtr<T> x_n = x.node(), o_n = out.node();
  const std::size_t off = begin * inner;
  record(tape, "slice", {x_n}, out, [=]() {
    if (!x_n->requires_grad) return;
    x_n->ensure_grad();
    for (std::size_t i = 0; i < o_n->grad.size(); ++i) x_n->grad[off + i] += o_n->grad[i];
  });
  return out;
}

template <typename T>
Tensor<T> reshape(const Tensor<T>& x, Shape shape, Tape<T>* tape) {
  require_defined(x, "reshape");
  if (shape_numel(shape) != x.numel()) {
    throw ShapeError("reshape: " + shape_str(x.shape()) + " -> " + shape_str(shape));
  }
  Tensor<T> out(std::move(shape), std::vector<T>(x.data().begin(), x.data().end()),
                x.requires_grad());
  NodePtr<T> x_n = x.node(), o_n = out.node();
  record(tape, "reshape", {x_n}, out, [=]() {
    if (!x_n->requires_grad) return;
    x_n->ensure_grad();
    for (std::size_t i = 0; i < o_n->grad.size(); ++i) x_n->grad[i] += o_n->grad[i];
  });
  return out;
}

template <typename T>
Tensor<T> gather(const Tensor<T>& x, std::span<const std::size_t> indices, Tape<T>* tape) {
  require_defined(x, "gather");
  if (indices.empty()) throw ShapeError("gather: no indices");
  std::vector<std::size_t> idx(indices.begin(), indices.end());
  std::vector<T> y(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] >= x.numel()) throw ShapeError("gather: index out of range");
    y[i] = x.data()[idx[i]];
  }
  Tensor<T> out({idx.size()}, std::move(y), x.requires_grad());
  NodePtr<T> x_n = x.node(), o_n = out.node();
  record(tape, "gather", {x_n}, out, [=, idx = std::move(idx)]() {
    if (!x_n->requires_grad) return;
    x_n->ensure_grad();
    for (std::size_t i = 0; i < idx.size(); ++i) x_n->grad[idx[i]] += o_n->grad[i];
  });
  return out;
}

namespace {

void pool_bin(std::size_t start, std::size_t len, std::size_t pool, std::size_t b,
              std::size_t& lo, std::size_t& hi) {
  // Integer arithmetic for floor(start + b*len/pool) and ceil(start + (b+1)*len/pool).
  lo = start + (b * len) / pool;
  hi = start + ((b + 1) * len + pool - 1) / pool;
}

}  // namespace

template <typename T>
Tensor<T> window_max_pool(const Tensor<T>& features, CellWindow win, std::size_t pool,
                          Tape<T>* tape) {
  require_rank3(features, "window_max_pool");
  if (pool == 0) throw ShapeError("window_max_pool: pool must be positive");
  const std::size_t c = features.dim(0), h = features.dim(1), w = features.dim(2);
  if (win.y1 > h || win.x1 > w || win.y0 >= win.y1 || win.x0 >= win.x1) {
    throw DomainError("window_max_pool: window outside the feature map");
  }
  constexpr std::size_t kEmpty = std::numeric_limits<std::size_t>::max();
  std::vector<T> y(c * pool * pool, T(0));
  std::vector<std::size_t> arg(y.size(), kEmpty);
  const auto d = features.data();
  for (std::size_t by = 0; by < pool; ++by) {
    std::size_t ylo, yhi;
    pool_bin(win.y0, win.y1 - win.y0, pool, by, ylo, yhi);
    yhi = std::min(yhi, win.y1);
    for (std::size_t bx = 0; bx < pool; ++bx) {
      std::size_t xlo, xhi;
      pool_bin(win.x0, win.x1 - win.x0, pool, bx, xlo, xhi);
      xhi = std::min(xhi, win.x1);
      if (ylo >= yhi || xlo >= xhi) continue;
      for (std::size_t ch = 0; ch < c; ++ch) {
        std::size_t best = kEmpty;
        for (std::size_t yy = ylo; yy < yhi; ++yy) {
          for (std::size_t xx = xlo; xx < xhi; ++xx) {
            const std::size_t i = (ch * h + yy) * w + xx;
            if (best == kEmpty || d[i] > d[best]) best = i;
          }
        }
        const std::size_t o = (ch * pool + by) * pool + bx;
        y[o] = d[best];
        arg[o] = best;
      }
    }
  }
  Tensor<T> out({c, pool, pool}, std::move(y), features.requires_grad());
  NodePtr<T> f_n = features.node(), o_n = out.node();
  record(tape, "roi_pool", {f_n}, out, [=, arg = std::move(arg)]() {
    if (!f_n->requires_grad) return;
    f_n->ensure_grad();
    for (std::size_t i = 0; i < arg.size(); ++i) {
      if (arg[i] != kEmpty) f_n->grad[arg[i]] += o_n->grad[i];
    }
  });
  return out;
}

template <typename T>
Tensor<T> bce_with_logits(const Tensor<T>& logits, const Tensor<T>& targets, Tape<T>* tape) {
  require_defined(logits, "bce_with_logits");
  require_defined(targets, "bce_with_logits");
  if (logits.shape() != targets.shape()) {
    throw ShapeError("bce_with_logits: shape mismatch " + shape_str(logits.shape()) + " vs " +
                     shape_str(targets.shape()));
  }
  const auto x = logits.data(), t = targets.data();
  T acc = T(0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    acc += std::max(x[i], T(0)) - x[i] * t[i] + std::log1p(std::exp(-std::abs(x[i])));
  }
  const T n = static_cast<T>(x.size());
  Tensor<T> out({1}, {acc / n}, logits.requires_grad());
  NodePtr<T> x_n = logits.node(), t_n = targets.node(), o_n = out.node();
  record(tape, "bce_with_logits", {x_n, t_n}, out, [=]() {
    if (!x_n->requires_grad) return;
    x_n->ensure_grad();
    const T g = o_n->grad[0] / n;
    for (std::size_t i = 0; i < x_n->data.size(); ++i) {
      x_n->grad[i] += g * (sigmoid_scalar(x_n->data[i]) - t_n->data[i]);
    }
  });
  return out;
}

template <typename T>
Tensor<T> cross_entropy(const Tensor<T>& logits, std::size_t target, Tape<T>* tape) {
  require_defined(logits, "cross_entropy");
  if (target >= logits.numel()) throw ShapeError("cross_entropy: target out of range");
  const auto x = logits.data();
  const T mx = *std::max_element(x.begin(), x.end());
  T z = T(0);
  for (const T v : x) z += std::exp(v - mx);
  const T lse = mx + std::log(z);
  Tensor<T> out({1}, {lse - x[target]}, logits.requires_grad());
  NodePtr<T> x_n = logits.node(), o_n = out.node();
  record(tape, "cross_entropy", {x_n}, out, [=]() {
    if (!x_n->requires_grad) return;
    x_n->ensure_grad();
    const T g = o_n->grad[0];
    for (std::size_t i = 0; i < x_n->data.size(); ++i) {
      const T p = std::exp(x_n->data[i] - lse);
      x_n->grad[i] += g * (p - (i == target ? T(1) : T(0)));
    }
  });
  return out;
}

template <typename T>
Tensor<T> smooth_l1(const Tensor<T>& pred, const Tensor<T>& target, double beta, Tape<T>* tape) {
  require_defined(pred, "smooth_l1");
  require_defined(target, "smooth_l1");
  if (pred.shape() != target.shape()) {
    throw ShapeError("smooth_l1: shape mismatch " + shape_str(pred.shape()) + " vs " +
                     shape_str(target.shape()));
  }
  const T b = static_cast<T>(beta);
  const auto p = pred.data(), t = target.data();
  T acc = T(0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    const T d = std::abs(p[i] - t[i]);
    acc += (b > T(0) && d < b) ? T(0.5) * d * d / b : d - T(0.5) * b;
  }
  Tensor<T> out({1}, {acc}, any_requires_grad<T>({&pred, &target}));
  NodePtr<T> p_n = pred.node(), t_n = target.node(), o_n = out.node();
  record(tape, "smooth_l1", {p_n, t_n}, out, [=]() {
    const T g = o_n->grad[0];
    if (p_n->requires_grad) p_n->ensure_grad();
    if (t_n->requires_grad) t_n->ensure_grad();
    for (std::size_t i = 0; i < p_n->data.size(); ++i) {
      const T d = p_n->data[i] - t_n->data[i];
      T dd;
      if (b > T(0) && std::abs(d) < b) {
        dd = d / b;
      } else {
        dd = d > T(0) ? T(1) : d < T(0) ? T(-1) : T(0);
      }
      if (p_n->requires_grad) p_n->grad[i] += g * dd;
      if (t_n->requires_grad) t_n->grad[i] -= g * dd;
    }
  });
  return out;
}

template <typename T>
std::vector<T> softmax(std::span<const T> logits) {
  std::vector<T> p(logits.size());
  if (logits.empty()) return p;
  const T mx = *std::max_element(logits.begin(), logits.end());
  T z = T(0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::exp(logits[i] - mx);
    z += p[i];
  }
  for (T& v : p) v /= z;
  return p;
}

#define SRDET_INSTANTIATE_OPS(T)                                                              \
  template Tensor<T> conv2d(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,             \
                            Conv2dParams, Tape<T>*);                                          \
  template Tensor<T> pointwise(const Tensor<T>&, PointwiseFn, double, Tape<T>*);              \
  template Tensor<T> clamp(const Tensor<T>&, double, double, Tape<T>*);                       \
  template Tensor<T> arith(const Tensor<T>&, const Tensor<T>&, ArithOp, Tape<T>*);            \
  template Tensor<T> add_scalar(const Tensor<T>&, double, Tape<T>*);                          \
  template Tensor<T> scale(const Tensor<T>&, double, Tape<T>*);                               \
  template Tensor<T> reduce(const Tensor<T>&, ReduceOp, Tape<T>*);                            \
  template Tensor<T> pixel_shuffle(const Tensor<T>&, std::size_t, Tape<T>*);                  \
  template Tensor<T> pixel_unshuffle(const Tensor<T>&, std::size_t, Tape<T>*);                \
  template Tensor<T> concat(const std::vector<Tensor<T>>&, Tape<T>*);                         \
  template Tensor<T> slice(const Tensor<T>&, std::size_t, std::size_t, Tape<T>*);             \
  template Tensor<T> reshape(const Tensor<T>&, Shape, Tape<T>*);                              \
  template Tensor<T> gather(const Tensor<T>&, std::span<const std::size_t>, Tape<T>*);        \
  template Tensor<T> window_max_pool(const Tensor<T>&, CellWindow, std::size_t, Tape<T>*);    \
  template Tensor<T> bce_with_logits(const Tensor<T>&, const Tensor<T>&, Tape<T>*);           \
  template Tensor<T> cross_entropy(const Tensor<T>&, std::size_t, Tape<T>*);                  \
  template Tensor<T> smooth_l1(const Tensor<T>&, const Tensor<T>&, double, Tape<T>*);         \
  template std::vector<T> softmax(std::span<const T>);

SRDET_INSTANTIATE_OPS(float)
SRDET_INSTANTIATE_OPS(double)

#undef SRDET_INSTANTIATE_OPS

}  // namespace srdet::ops
