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
#include "srdet/sr/discriminator.hpp"

namespace srdet::train {

struct FeatureExtractorSpec {
  std::size_t input_channels = 3;
  // 3x3 conv + leaky_relu layers.
  std::vector<sr::ConvStage> layers{{16, 1}, {16, 2}, {16, 1}};
  // 1-based index of the layer whose activation is compared.
  std::size_t tap_layer = 3;
  std::uint64_t seed = 7;

  void validate() const;
};

// Fixed, seeded feature network used as the perceptual-loss embedding.
// Its parameters never require grad, but gradients still flow through it to
// the compared images.
template <typename T>
class FeatureExtractor {
 public:
  static constexpr double kLeakySlope = 0.2;

  explicit FeatureExtractor(const FeatureExtractorSpec& spec = {});

  Tensor<T> features(const Tensor<T>& image, Tape<T>* tape = nullptr) const;

  const FeatureExtractorSpec& spec() const { return spec_; }
  std::vector<NamedTensor<T>> parameters() const;
  // CRC-32 over the raw parameter bytes; changes iff any parameter changes.
  std::uint32_t parameter_hash() const;

 private:
  FeatureExtractorSpec spec_;
  std::vector<Conv2d<T>> layers_;
};

extern template class FeatureExtractor<float>;
extern template class FeatureExtractor<double>;

}  // namespace srdet::train
