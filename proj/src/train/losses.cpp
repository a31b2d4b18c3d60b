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

#include "srdet/train/losses.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "srdet/core/ops.hpp"

namespace srdet::train {
namespace {

template <typename T>
void check_scores(const Tensor<T>& scores, const char* what) {
  if (!scores.defined() || scores.numel() == 0) {
    throw DomainError(std::string(what) + ": empty score batch");
  }
  const auto d = scores.data();
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!(d[i] >= T(0) && d[i] <= T(1))) {
      throw DomainError(std::string(what) + ": score " + std::to_string(d[i]) + " at index " +
                            std::to_string(i) + " outside [0, 1]",
                        i);
    }
  }
}

template <typename T>
Tensor<T> safe_log(const Tensor<T>& p, Tape<T>* tape) {
  return ops::log(ops::clamp(p, kLogFloor, 1.0, tape), tape);
}

template <typename T>
Tensor<T> one_minus(const Tensor<T>& p, Tape<T>* tape) {
  return ops::add_scalar(ops::scale(p, -1.0, tape), 1.0, tape);
}

Tensor<double> as_tensor(std::span<const double> v) {
  if (v.empty()) throw DomainError("empty score batch");
  return Tensor<double>({v.size()}, std::vector<double>(v.begin(), v.end()));
}

}  // namespace

void LossWeights::validate() const {
  for (double v : {lambda_gan, lambda_perceptual, lambda_content}) {
    if (!std::isfinite(v) || v < 0.0) {
      throw ValidationError("loss weights must be finite and non-negative");
    }
  }
}

template <typename T>
Tensor<T> adversarial_value(const Tensor<T>& d_real, const Tensor<T>& d_fake, Tape<T>* tape) {
  check_scores(d_real, "adversarial_value");
  check_scores(d_fake, "adversarial_value");
  const Tensor<T> real_term = ops::mean(safe_log(d_real, tape), tape);
  const Tensor<T> fake_term = ops::mean(safe_log(one_minus(d_fake, tape), tape), tape);
  return ops::add(real_term, fake_term, tape);
}

template <typename T>
Tensor<T> generator_adversarial_loss(const Tensor<T>& d_fake, Tape<T>* tape) {
  check_scores(d_fake, "generator_adversarial_loss");
  return ops::scale(ops::mean(safe_log(d_fake, tape), tape), -1.0, tape);
}

template <typename T>
Tensor<T> discriminator_loss(const Tensor<T>& d_real, const Tensor<T>& d_fake, Tape<T>* tape) {
  return ops::scale(adversarial_value(d_real, d_fake, tape), -1.0, tape);
}

template <typename T>
Tensor<T> perceptual_loss(const FeatureExtractor<T>& phi, const Tensor<T>& hr, const Tensor<T>& sr,
                          Tape<T>* tape) {
  if (hr.shape() != sr.shape()) {
    throw ShapeError("perceptual_loss: image shapes differ " + shape_str(hr.shape()) + " vs " +
                     shape_str(sr.shape()));
  }
  const Tensor<T> diff = ops::sub(phi.features(hr, tape), phi.features(sr, tape), tape);
  return ops::scale(ops::l1norm(diff, tape), 1.0 / static_cast<double>(diff.numel()), tape);
}

template <typename T>
Tensor<T> content_loss(const Tensor<T>& hr, const Tensor<T>& sr, Tape<T>* tape) {
  if (hr.shape() != sr.shape()) {
    throw ShapeError("content_loss: image shapes differ " + shape_str(hr.shape()) + " vs " +
                     shape_str(sr.shape()));
  }
  const Tensor<T> diff = ops::sub(hr, sr, tape);
  return ops::scale(ops::l1norm(diff, tape), 1.0 / static_cast<double>(diff.numel()), tape);
}

double total_loss(const LossWeights& w, double l_gan, double l_perceptual, double l_content) {
  return w.lambda_gan * l_gan + w.lambda_perceptual * l_perceptual +
         w.lambda_content * l_content;
}

double adversarial_value(std::span<const double> d_real, std::span<const double> d_fake) {
  return adversarial_value<double>(as_tensor(d_real), as_tensor(d_fake)).item();
}

double generator_adversarial_loss(std::span<const double> d_fake) {
  return generator_adversarial_loss<double>(as_tensor(d_fake)).item();
}

double discriminator_loss(std::span<const double> d_real, std::span<const double> d_fake) {
  return discriminator_loss<double>(as_tensor(d_real), as_tensor(d_fake)).item();
}

#define SRDET_INSTANTIATE_LOSSES(T)                                                          \
  template Tensor<T> adversarial_value(const Tensor<T>&, const Tensor<T>&, Tape<T>*);        \
  template Tensor<T> generator_adversarial_loss(const Tensor<T>&, Tape<T>*);                 \
  template Tensor<T> discriminator_loss(const Tensor<T>&, const Tensor<T>&, Tape<T>*);       \
  template Tensor<T> perceptual_loss(const FeatureExtractor<T>&, const Tensor<T>&,           \
                                     const Tensor<T>&, Tape<T>*);                            \
  template Tensor<T> content_loss(const Tensor<T>&, const Tensor<T>&, Tape<T>*);

SRDET_INSTANTIATE_LOSSES(float)
SRDET_INSTANTIATE_LOSSES(double)

#undef SRDET_INSTANTIATE_LOSSES

}  // namespace srdet::train
