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

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "srdet/core/ops.hpp"
#include "srdet/core/rng.hpp"
#include "srdet/core/tensor.hpp"

namespace srdet {

template <typename T>
struct NamedTensor {
  std::string name;
  Tensor<T> tensor;
};

// Convolution layer with uniform(-a, a), a = sqrt(1 / fan_in) initialization
// for both kernel and bias. Values are drawn in double and then narrowed, so
// float and double networks built from the same seed agree to float rounding.
template <typename T>
class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(std::string name, std::size_t in_channels, std::size_t out_channels,
         std::size_t kernel, std::size_t stride, std::size_t padding, Rng& rng,
         bool trainable = true)
      : name_(std::move(name)), stride_(stride), padding_(padding) {
    const std::size_t fan_in = in_channels * kernel * kernel;
    const double a = std::sqrt(1.0 / static_cast<double>(fan_in));
    std::vector<T> w(out_channels * fan_in);
    for (T& v : w) v = static_cast<T>(rng.uniform(-a, a));
    std::vector<T> b(out_channels);
    for (T& v : b) v = static_cast<T>(rng.uniform(-a, a));
    weight_ = Tensor<T>({out_channels, in_channels, kernel, kernel}, std::move(w), trainable);
    bias_ = Tensor<T>({out_channels}, std::move(b), trainable);
  }

  Tensor<T> operator()(const Tensor<T>& x, Tape<T>* tape = nullptr) const {
    return ops::conv2d(x, weight_, bias_, {stride_, padding_}, tape);
  }

  const Tensor<T>& weight() const { return weight_; }
  const Tensor<T>& bias() const { return bias_; }
  Tensor<T>& weight() { return weight_; }
  Tensor<T>& bias() { return bias_; }
  std::size_t in_channels() const { return weight_.dim(1); }
  std::size_t out_channels() const { return weight_.dim(0); }
  std::size_t stride() const { return stride_; }

  void collect(std::vector<NamedTensor<T>>& out) const {
    out.push_back({name_ + ".weight", weight_});
    out.push_back({name_ + ".bias", bias_});
  }

 private:
  std::string name_;
  std::size_t stride_ = 1;
  std::size_t padding_ = 0;
  Tensor<T> weight_;
  Tensor<T> bias_;
};

template <typename T>
std::size_t count_parameters(const std::vector<NamedTensor<T>>& params) {
  std::size_t n = 0;
  for (const auto& p : params) n += p.tensor.numel();
  return n;
}

}  // namespace srdet
