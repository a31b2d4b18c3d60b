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

#include "srdet/sr/discriminator.hpp"

#include <string>

namespace srdet::sr {

void DiscriminatorSpec::validate() const {
  if (input_channels == 0) throw ValidationError("discriminator: input_channels must be positive");
  for (const ConvStage& s : conv_stages) {
    if (s.out_channels == 0 || s.stride == 0) {
      throw ValidationError("discriminator: stage channels and stride must be positive");
    }
  }
}

std::size_t DiscriminatorSpec::min_input_extent() const {
  std::size_t n = 1;
  for (const ConvStage& s : conv_stages) n *= s.stride;
  return n;
}

template <typename T>
Discriminator<T>::Discriminator(const DiscriminatorSpec& spec, std::uint64_t seed) : spec_(spec) {
  spec_.validate();
  Rng rng(seed);
  std::size_t in = spec_.input_channels;
  for (std::size_t i = 0; i < spec_.conv_stages.size(); ++i) {
    const ConvStage& s = spec_.conv_stages[i];
    stages_.emplace_back("stage." + std::to_string(i), in, s.out_channels, 3, s.stride, 1, rng);
    in = s.out_channels;
  }
  head_ = Conv2d<T>("head", in, 1, 1, 1, 0, rng);
}

template <typename T>
Tensor<T> Discriminator<T>::forward(const Tensor<T>& image, Tape<T>* tape) const {
  if (image.rank() != 3 || image.dim(0) != spec_.input_channels) {
    throw ShapeError("discriminator: expected " + std::to_string(spec_.input_channels) +
                     "-channel [C,H,W] input, got " + shape_str(image.shape()));
  }
  const std::size_t min_extent = spec_.min_input_extent();
  if (image.dim(1) < min_extent || image.dim(2) < min_extent) {
    throw ShapeError("discriminator: input " + shape_str(image.shape()) +
                     " too small for a stride stack needing " + std::to_string(min_extent) +
                     " pixels per side");
  }
  Tensor<T> h = image;
  for (const Conv2d<T>& stage : stages_) h = ops::leaky_relu(stage(h, tape), kLeakySlope, tape);
  return ops::sigmoid(ops::mean(head_(h, tape), tape), tape);
}

template <typename T>
std::vector<NamedTensor<T>> Discriminator<T>::parameters() const {
  std::vector<NamedTensor<T>> out;
  for (const Conv2d<T>& s : stages_) s.collect(out);
  head_.collect(out);
  return out;
}

template class Discriminator<float>;
template class Discriminator<double>;

}  // namespace srdet::sr
