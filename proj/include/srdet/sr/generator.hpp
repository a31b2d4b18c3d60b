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
#include <vector>

#include "srdet/core/layers.hpp"
#include "srdet/core/tensor.hpp"

namespace srdet::sr {

struct GeneratorSpec {
  std::size_t num_rrdb = 3;
  std::size_t base_channels = 16;
  std::size_t growth_channels = 8;
  double residual_beta = 0.2;
  std::size_t scale_factor = 4;
  std::size_t input_channels = 3;

  // Throws ValidationError on out-of-range fields.
  void validate() const;
  std::size_t upsample_stages() const;
  bool operator==(const GeneratorSpec&) const = default;
};

// ESRGAN-style super-resolution generator:
//
//   first conv -> num_rrdb RRDBs -> trunk conv -> (+ first-conv output)
//     -> log2(scale) x [conv, pixel_shuffle(2), leaky_relu] -> final conv
//     -> clamp to [0, 1]
//
// Every RRDB chains three residual dense blocks. A dense block runs five 3x3
// convolutions, each fed the concatenation of the block input and all earlier
// conv outputs, and returns x + beta * conv5(...). The RRDB itself returns
// x + beta * (chain(x) - x), so a block whose dense convolutions are all zero
// is exactly the identity.
template <typename T>
class Generator {
 public:
  static constexpr double kLeakySlope = 0.2;

  Generator(const GeneratorSpec& spec, std::uint64_t seed);

  // [C, H, W] in [0, 1] -> [C, s*H, s*W] in [0, 1].
  Tensor<T> forward(const Tensor<T>& lr, Tape<T>* tape = nullptr) const;
  Tensor<T> rrdb_forward(std::size_t block, const Tensor<T>& x, Tape<T>* tape = nullptr) const;
  // Output of the RRDB stack alone (no trunk conv, no skip).
  Tensor<T> rrdb_stack_forward(const Tensor<T>& x, Tape<T>* tape = nullptr) const;
  Tensor<T> first_conv_forward(const Tensor<T>& lr, Tape<T>* tape = nullptr) const;

  const GeneratorSpec& spec() const { return spec_; }
  // Stable layer-path names in construction order.
  std::vector<NamedTensor<T>> parameters() const;
  // Parameters of the dense convolutions inside RRDB `block`.
  std::vector<NamedTensor<T>> dense_path_parameters(std::size_t block) const;
  std::size_t parameter_count() const { return count_parameters(parameters()); }

 private:
  struct DenseBlock {
    Conv2d<T> convs[5];
  };
  struct Rrdb {
    DenseBlock blocks[3];
  };

  Tensor<T> dense_block_forward(const DenseBlock& db, const Tensor<T>& x, Tape<T>* tape) const;

  GeneratorSpec spec_;
  Conv2d<T> first_;
  std::vector<Rrdb> rrdbs_;
  Conv2d<T> trunk_;
  std::vector<Conv2d<T>> upsample_;
  Conv2d<T> final_;
};

extern template class Generator<float>;
extern template class Generator<double>;

}  // namespace srdet::sr
