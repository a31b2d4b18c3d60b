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
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "srdet/sr/discriminator.hpp"
#include "srdet/sr/generator.hpp"
#include "srdet/train/adam.hpp"
#include "srdet/train/feature_extractor.hpp"
#include "srdet/train/losses.hpp"

namespace srdet::train {

template <typename T>
struct SrPair {
  Tensor<T> lr;
  Tensor<T> hr;
};

// Generator objective for a batch, with the graph kept for backward.
template <typename T>
struct GeneratorObjective {
  Tensor<T> total;
  double l_gan = 0.0;
  double l_perceptual = 0.0;
  double l_content = 0.0;
};

template <typename T>
GeneratorObjective<T> generator_objective(const sr::Generator<T>& g, const sr::Discriminator<T>& d,
                                          const FeatureExtractor<T>& phi,
                                          std::span<const SrPair<T>> batch,
                                          const LossWeights& weights, Tape<T>* tape = nullptr);

// Mean perceptual loss of g over a batch, no graph.
template <typename T>
double batch_perceptual_loss(const sr::Generator<T>& g, const FeatureExtractor<T>& phi,
                             std::span<const SrPair<T>> batch);

// Raises NumericError naming the first tape op that produced a non-finite
// value when `loss` is not finite.
template <typename T>
void require_finite(const Tensor<T>& loss, const Tape<T>& tape, const char* what);

// One adversarial step is a discriminator update against the detached
// generator output followed by a generator update.
template <typename T>
class SrTrainer {
 public:
  SrTrainer(sr::Generator<T>& g, sr::Discriminator<T>& d, const FeatureExtractor<T>& phi,
            LossWeights weights = {}, AdamOptions adam = {});

  LossReport train_step(std::span<const SrPair<T>> batch);
  long steps() const { return step_; }

 private:
  sr::Generator<T>& g_;
  sr::Discriminator<T>& d_;
  const FeatureExtractor<T>& phi_;
  LossWeights weights_;
  Adam<T> g_opt_;
  Adam<T> d_opt_;
  long step_ = 0;
};

extern template class SrTrainer<float>;
extern template class SrTrainer<double>;

struct SrTrainingOptions {
  std::size_t steps = 200;
  std::size_t batch_size = 4;
  std::uint64_t seed = 1;
  LossWeights weights;
  AdamOptions adam;
};

// Runs options.steps train_steps over batches drawn from a per-epoch seeded
// shuffle of `data`. Returns one report per step.
std::vector<LossReport> train_sr(sr::Generator<float>& g, sr::Discriminator<float>& d,
                                 const FeatureExtractor<float>& phi,
                                 std::span<const SrPair<float>> data,
                                 const SrTrainingOptions& options,
                                 const std::function<void(const LossReport&)>& on_step = {});

// Columns: step,l_gan,l_perceptual,l_total,d_loss.
void write_loss_history_csv(std::ostream& out, std::span<const LossReport> history);

}  // namespace srdet::train
