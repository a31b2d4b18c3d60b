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

#include <span>

#include "srdet/core/tensor.hpp"
#include "srdet/train/feature_extractor.hpp"

namespace srdet::train {

// Floor applied to probabilities before every log in the loss code.
inline constexpr double kLogFloor = 1e-12;

struct LossWeights {
  double lambda_gan = 0.005;
  double lambda_perceptual = 1.0;
  // Optional pixel-L1 content term; 0 gives the two-term objective.
  double lambda_content = 0.0;

  void validate() const;
};

struct LossReport {
  long step = 0;
  double l_gan = 0.0;
  double l_perceptual = 0.0;
  double l_content = 0.0;
  double l_total = 0.0;
  double discriminator_loss = 0.0;
};

// Scores are rank-1 tensors of per-image discriminator outputs. Every score
// must lie in [0, 1]; anything else (or NaN) raises DomainError.

// mean(log D(real)) + mean(log(1 - D(fake))): the adversarial value as the
// discriminator maximizes it.
template <typename T>
Tensor<T> adversarial_value(const Tensor<T>& d_real, const Tensor<T>& d_fake,
                            Tape<T>* tape = nullptr);

// Non-saturating generator term mean(-log D(fake)).
template <typename T>
Tensor<T> generator_adversarial_loss(const Tensor<T>& d_fake, Tape<T>* tape = nullptr);

// The discriminator descends -adversarial_value.
template <typename T>
Tensor<T> discriminator_loss(const Tensor<T>& d_real, const Tensor<T>& d_fake,
                             Tape<T>* tape = nullptr);

// ||phi(hr) - phi(sr)||_1 divided by the feature element count.
template <typename T>
Tensor<T> perceptual_loss(const FeatureExtractor<T>& phi, const Tensor<T>& hr, const Tensor<T>& sr,
                          Tape<T>* tape = nullptr);

// Mean absolute pixel difference.
template <typename T>
Tensor<T> content_loss(const Tensor<T>& hr, const Tensor<T>& sr, Tape<T>* tape = nullptr);

double total_loss(const LossWeights& w, double l_gan, double l_perceptual,
                  double l_content = 0.0);

double adversarial_value(std::span<const double> d_real, std::span<const double> d_fake);
double generator_adversarial_loss(std::span<const double> d_fake);
double discriminator_loss(std::span<const double> d_real, std::span<const double> d_fake);

}  // namespace srdet::train
