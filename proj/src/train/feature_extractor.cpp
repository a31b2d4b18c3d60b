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

#include "srdet/train/feature_extractor.hpp"

#include <cstring>
#include <string>

#include "srdet/sr/checkpoint.hpp"

namespace srdet::train {

void FeatureExtractorSpec::validate() const {
  if (input_channels == 0) throw ValidationError("feature extractor: no input channels");
  if (layers.empty()) throw ValidationError("feature extractor: needs at least one layer");
  if (tap_layer == 0 || tap_layer > layers.size()) {
    throw ValidationError("feature extractor: tap_layer must be in [1, " +
                          std::to_string(layers.size()) + "]");
  }
  for (const auto& l : layers) {
    if (l.out_channels == 0 || l.stride == 0) {
      throw ValidationError("feature extractor: layer channels and stride must be positive");
    }
  }
}

template <typename T>
FeatureExtractor<T>::FeatureExtractor(const FeatureExtractorSpec& spec) : spec_(spec) {
  spec_.validate();
  Rng rng(spec_.seed);
  std::size_t in = spec_.input_channels;
  for (std::size_t i = 0; i < spec_.layers.size(); ++i) {
    layers_.emplace_back("phi." + std::to_string(i), in, spec_.layers[i].out_channels, 3,
                         spec_.layers[i].stride, 1, rng, /*trainable=*/false);
    in = spec_.layers[i].out_channels;
  }
}

template <typename T>
Tensor<T> FeatureExtractor<T>::features(const Tensor<T>& image, Tape<T>* tape) const {
  Tensor<T> h = image;
  for (std::size_t i = 0; i < spec_.tap_layer; ++i) {
    h = ops::leaky_relu(layers_[i](h, tape), kLeakySlope, tape);
  }
  return h;
}

template <typename T>
std::vector<NamedTensor<T>> FeatureExtractor<T>::parameters() const {
  std::vector<NamedTensor<T>> out;
  for (const auto& l : layers_) l.collect(out);
  return out;
}

template <typename T>
std::uint32_t FeatureExtractor<T>::parameter_hash() const {
  std::vector<std::uint8_t> bytes;
  for (const auto& p : parameters()) {
    const auto d = p.tensor.data();
    const auto* b = reinterpret_cast<const std::uint8_t*>(d.data());
    bytes.insert(bytes.end(), b, b + d.size_bytes());
  }
  return sr::crc32(bytes);
}

template class FeatureExtractor<float>;
template class FeatureExtractor<double>;

}  // namespace srdet::train
