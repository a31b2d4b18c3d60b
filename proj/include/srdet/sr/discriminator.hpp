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
#include <cstdint>
#include <utility>
#include <vector>

#include "srdet/core/layers.hpp"
#include "srdet/core/tensor.hpp"

namespace srdet::sr {

struct ConvStage {
  std::size_t out_channels = 0;
  std::size_t stride = 1;
  bool operator==(const ConvStage&) const = default;
};

struct DiscriminatorSpec {
  std::vector<ConvStage> conv_stages{{16, 2}, {32, 2}, {32, 2}, {64, 2}};
  std::size_t input_channels = 3;

  void validate() const;
  // Smallest spatial extent the stride stack accepts.
  std::size_t min_input_extent() const;
  bool operator==(const DiscriminatorSpec&) const = default;
};

// Strided 3x3 conv + leaky_relu stages, a 1x1 conv to one channel, global
// mean, sigmoid. One score in (0, 1) per image.
template <typename T>
class Discriminator {
 public:
  static constexpr double kLeakySlope = 0.2;

  Discriminator(const DiscriminatorSpec& spec, std::uint64_t seed);

  // [C, H, W] -> shape (1) score.
  Tensor<T> forward(const Tensor<T>& image, Tape<T>* tape = nullptr) const;

  const DiscriminatorSpec& spec() const { return spec_; }
  std::vector<NamedTensor<T>> parameters() const;
  Conv2d<T>& head() { return head_; }

 private:
  DiscriminatorSpec spec_;
  std::vector<Conv2d<T>> stages_;
  Conv2d<T> head_;
};

extern template class Discriminator<float>;
extern template class Discriminator<double>;

}  // namespace srdet::sr
