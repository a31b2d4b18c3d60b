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

#include "srdet/train/sr_trainer.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "srdet/core/ops.hpp"
#include "srdet/train/batch_sampler.hpp"

namespace srdet::train {
namespace {

template <typename T>
std::vector<Tensor<T>> tensors_of(const std::vector<NamedTensor<T>>& named) {
  std::vector<Tensor<T>> out;
  out.reserve(named.size());
  for (const auto& p : named) out.push_back(p.tensor);
  return out;
}

template <typename T>
void check_batch(std::span<const SrPair<T>> batch) {
  if (batch.empty()) throw ValidationError("empty training batch");
}

}  // namespace

template <typename T>
void require_finite(const Tensor<T>& loss, const Tape<T>& tape, const char* what) {
  if (loss.all_finite()) return;
  const auto bad = tape.first_non_finite_op();
  if (bad) {
    throw NumericError(std::string(what) + " is not finite; first non-finite value from op '" +
                           bad->first + "' (tape entry " + std::to_string(bad->second) + ")",
                       bad->first);
  }
  throw NumericError(std::string(what) + " is not finite; inputs were already non-finite",
                     "input");
}

template <typename T>
GeneratorObjective<T> generator_objective(const sr::Generator<T>& g, const sr::Discriminator<T>& d,
                                          const FeatureExtractor<T>& phi,
                                          std::span<const SrPair<T>> batch,
                                          const LossWeights& weights, Tape<T>* tape) {
  check_batch(batch);
  weights.validate();
  std::vector<Tensor<T>> scores;
  std::vector<Tensor<T>> perceptual;
  std::vector<Tensor<T>> content;
  for (const auto& pair : batch) {
    const Tensor<T> sr = g.forward(pair.lr, tape);
    scores.push_back(d.forward(sr, tape));
    perceptual.push_back(perceptual_loss(phi, pair.hr, sr, tape));
    if (weights.lambda_content != 0.0) content.push_back(content_loss(pair.hr, sr, tape));
  }
  GeneratorObjective<T> out;
  const Tensor<T> fake_scores = ops::concat(scores, tape);
  if (tape != nullptr) {
    require_finite(fake_scores, *tape, "discriminator score on SR");
  } else {
    require_finite(fake_scores, Tape<T>{}, "discriminator score on SR");
  }
  const Tensor<T> l_gan = generator_adversarial_loss(fake_scores, tape);
  const Tensor<T> l_perc = ops::mean(ops::concat(perceptual, tape), tape);
  Tensor<T> total = ops::add(ops::scale(l_gan, weights.lambda_gan, tape),
                             ops::scale(l_perc, weights.lambda_perceptual, tape), tape);
  out.l_gan = static_cast<double>(l_gan.item());
  out.l_perceptual = static_cast<double>(l_perc.item());
  if (!content.empty()) {
    const Tensor<T> l_content = ops::mean(ops::concat(content, tape), tape);
    total = ops::add(total, ops::scale(l_content, weights.lambda_content, tape), tape);
    out.l_content = static_cast<double>(l_content.item());
  }
  out.total = total;
  return out;
}

template <typename T>
double batch_perceptual_loss(const sr::Generator<T>& g, const FeatureExtractor<T>& phi,
                             std::span<const SrPair<T>> batch) {
  check_batch(batch);
  double acc = 0.0;
  for (const auto& pair : batch) {
    acc += static_cast<double>(perceptual_loss(phi, pair.hr, g.forward(pair.lr)).item());
  }
  return acc / static_cast<double>(batch.size());
}

template <typename T>
SrTrainer<T>::SrTrainer(sr::Generator<T>& g, sr::Discriminator<T>& d,
                        const FeatureExtractor<T>& phi, LossWeights weights, AdamOptions adam)
    : g_(g),
      d_(d),
      phi_(phi),
      weights_(weights),
      g_opt_(tensors_of(g.parameters()), adam),
      d_opt_(tensors_of(d.parameters()), adam) {
  weights_.validate();
}

template <typename T>
LossReport SrTrainer<T>::train_step(std::span<const SrPair<T>> batch) {
  check_batch(batch);
  LossReport report;
  report.step = step_;

  {
    Tape<T> tape;
    std::vector<Tensor<T>> real, fake;
    for (const auto& pair : batch) {
      real.push_back(d_.forward(pair.hr, &tape));
      fake.push_back(d_.forward(g_.forward(pair.lr).detach(), &tape));
    }
    const Tensor<T> real_scores = ops::concat(real, &tape);
    const Tensor<T> fake_scores = ops::concat(fake, &tape);
    require_finite(real_scores, tape, "discriminator score on HR");
    require_finite(fake_scores, tape, "discriminator score on SR");
    const Tensor<T> loss = discriminator_loss(real_scores, fake_scores, &tape);
    require_finite(loss, tape, "discriminator loss");
    d_opt_.zero_grad();
    backward(loss, tape);
    d_opt_.step();
    report.discriminator_loss = static_cast<double>(loss.item());
  }

  {
    Tape<T> tape;
    const GeneratorObjective<T> obj = generator_objective(g_, d_, phi_, batch, weights_, &tape);
    require_finite(obj.total, tape, "generator loss");
    g_opt_.zero_grad();
    backward(obj.total, tape);
    g_opt_.step();
    // The generator pass also deposits gradients on the discriminator.
    d_opt_.zero_grad();
    report.l_gan = obj.l_gan;
    report.l_perceptual = obj.l_perceptual;
    report.l_content = obj.l_content;
    report.l_total = total_loss(weights_, obj.l_gan, obj.l_perceptual, obj.l_content);
  }

  ++step_;
  return report;
}

std::vector<LossReport> train_sr(sr::Generator<float>& g, sr::Discriminator<float>& d,
                                 const FeatureExtractor<float>& phi,
                                 std::span<const SrPair<float>> data,
                                 const SrTrainingOptions& options,
                                 const std::function<void(const LossReport&)>& on_step) {
  if (data.empty()) throw ValidationError("train_sr: no training pairs");
  SrTrainer<float> trainer(g, d, phi, options.weights, options.adam);
  BatchSampler sampler(data.size(), options.batch_size, options.seed);
  std::vector<SrPair<float>> batch;
  std::vector<LossReport> history;
  history.reserve(options.steps);
  for (std::size_t s = 0; s < options.steps; ++s) {
    batch.clear();
    for (std::size_t i : sampler.next()) batch.push_back(data[i]);
    history.push_back(trainer.train_step(batch));
    if (on_step) on_step(history.back());
  }
  return history;
}

void write_loss_history_csv(std::ostream& out, std::span<const LossReport> history) {
  out << "step,l_gan,l_perceptual,l_total,d_loss\n";
  char buf[160];
  for (const auto& r : history) {
    std::snprintf(buf, sizeof(buf), "%ld,%.9g,%.9g,%.9g,%.9g\n", r.step, r.l_gan, r.l_perceptual,
                  r.l_total, r.discriminator_loss);
    out << buf;
  }
}

#define SRDET_INSTANTIATE_TRAINER(T)                                                         \
  template void require_finite(const Tensor<T>&, const Tape<T>&, const char*);               \
  template GeneratorObjective<T> generator_objective(                                        \
      const sr::Generator<T>&, const sr::Discriminator<T>&, const FeatureExtractor<T>&,      \
      std::span<const SrPair<T>>, const LossWeights&, Tape<T>*);                             \
  template double batch_perceptual_loss(const sr::Generator<T>&, const FeatureExtractor<T>&, \
                                        std::span<const SrPair<T>>);                         \
  template class SrTrainer<T>;

SRDET_INSTANTIATE_TRAINER(float)
SRDET_INSTANTIATE_TRAINER(double)

#undef SRDET_INSTANTIATE_TRAINER

}  // namespace srdet::train
