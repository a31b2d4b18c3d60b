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

#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "srdet/core/ops.hpp"
#include "srdet/train/adam.hpp"
#include "srdet/train/batch_sampler.hpp"
#include "srdet/train/losses.hpp"
#include "srdet/train/sr_trainer.hpp"
#include "test_util.hpp"

namespace srdet::train {
namespace {

using testing::random_tensor;

sr::GeneratorSpec tiny_generator() {
  sr::GeneratorSpec s;
  s.num_rrdb = 1;
  s.base_channels = 8;
  s.growth_channels = 4;
  return s;
}

sr::DiscriminatorSpec tiny_discriminator() {
  sr::DiscriminatorSpec s;
  s.conv_stages = {{8, 2}, {8, 2}};
  return s;
}

std::vector<SrPair<float>> random_pairs(std::size_t n, Rng& rng) {
  std::vector<SrPair<float>> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({random_tensor<float>({3, 4, 4}, rng, 0, 1),
                   random_tensor<float>({3, 16, 16}, rng, 0, 1)});
  }
  return out;
}

TEST(LossesTest, AdversarialValueAtOneHalf) {
  const Tensor<double> half({1}, {0.5});
  EXPECT_NEAR(adversarial_value(half, half).item(), 2.0 * std::log(0.5), 1e-9);
  const std::vector<double> h{0.5};
  EXPECT_NEAR(adversarial_value(h, h), 2.0 * std::log(0.5), 1e-9);
  EXPECT_NEAR(discriminator_loss(h, h), -2.0 * std::log(0.5), 1e-9);
  EXPECT_NEAR(generator_adversarial_loss(h), -std::log(0.5), 1e-9);
}

TEST(LossesTest, AdversarialValueIsFiniteAtSaturation) {
  const std::vector<double> one{1.0}, zero{0.0};
  EXPECT_TRUE(std::isfinite(adversarial_value(zero, one)));
  EXPECT_NEAR(adversarial_value(zero, one), 2.0 * std::log(kLogFloor), 1e-6);
  EXPECT_THROW(adversarial_value(std::vector<double>{1.5}, one), DomainError);
}

TEST(LossesTest, PerceptualLossOfIdenticalImagesIsExactlyZero) {
  const FeatureExtractor<float> phi;
  Rng rng(3);
  const auto x = random_tensor<float>({3, 20, 20}, rng, 0, 1);
  EXPECT_EQ(perceptual_loss(phi, x, x.clone()).item(), 0.0f);
  const auto y = random_tensor<float>({3, 20, 20}, rng, 0, 1);
  EXPECT_GT(perceptual_loss(phi, x, y).item(), 0.0f);
}

TEST(LossesTest, TotalLossIsLinear) {
  LossWeights w;
  w.lambda_gan = 0.25;
  w.lambda_perceptual = 2.0;
  w.lambda_content = 0.5;
  EXPECT_NEAR(total_loss(w, 4.0, 1.5, 2.0), 1.0 + 3.0 + 1.0, 1e-12);
  w.lambda_gan = -1;
  EXPECT_THROW(w.validate(), ValidationError);
}

TEST(FeatureExtractorTest, FixedAndFrozen) {
  const FeatureExtractor<float> a, b;
  EXPECT_EQ(a.parameter_hash(), b.parameter_hash());
  FeatureExtractorSpec other;
  other.seed = 8;
  EXPECT_NE(FeatureExtractor<float>(other).parameter_hash(), a.parameter_hash());
  for (const auto& p : a.parameters()) EXPECT_FALSE(p.tensor.requires_grad()) << p.name;
}

TEST(AdamTest, FirstStepMovesByLearningRate) {
  // With bias correction the first update is lr * g / (|g| + eps).
  Tensor<double> p({2}, {1.0, -1.0}, true);
  Adam<double> opt({p}, {0.1, 0.9, 0.999, 1e-8});
  Tape<double> tape;
  backward(ops::sum(ops::scale(p, 3.0, &tape), &tape), tape);
  opt.step();
  EXPECT_NEAR(p.data()[0], 1.0 - 0.1 * 3.0 / (3.0 + 1e-8), 1e-12);
  EXPECT_NEAR(p.data()[1], -1.0 - 0.1 * 3.0 / (3.0 + 1e-8), 1e-12);
  EXPECT_EQ(opt.steps(), 1);
  opt.zero_grad();
  EXPECT_FALSE(p.has_grad());
}

TEST(BatchSamplerTest, EpochsArePermutationsAndBatchesHaveNoRepeats) {
  BatchSampler s(5, 3, 9);
  std::vector<std::size_t> seen;
  for (int b = 0; b < 10; ++b) {
    const auto batch = s.next();
    ASSERT_EQ(batch.size(), 3u);
    EXPECT_EQ(std::set<std::size_t>(batch.begin(), batch.end()).size(), 3u);
    seen.insert(seen.end(), batch.begin(), batch.end());
  }
  // The first epoch is a permutation of 0..4.
  EXPECT_EQ(std::set<std::size_t>(seen.begin(), seen.begin() + 5).size(), 5u);
  EXPECT_THROW(BatchSampler(0, 1, 1), ValidationError);
}

TEST(SrTrainerTest, ReportRecomposesTotal) {
  sr::Generator<float> g(tiny_generator(), 1);
  sr::Discriminator<float> d(tiny_discriminator(), 2);
  const FeatureExtractor<float> phi;
  LossWeights w;
  w.lambda_content = 0.3;
  SrTrainer<float> trainer(g, d, phi, w);
  Rng rng(4);
  const auto batch = random_pairs(2, rng);
  for (int i = 0; i < 3; ++i) {
    const LossReport r = trainer.train_step(batch);
    EXPECT_EQ(r.step, i);
    EXPECT_NEAR(r.l_total, total_loss(w, r.l_gan, r.l_perceptual, r.l_content), 1e-9);
    EXPECT_TRUE(std::isfinite(r.discriminator_loss));
  }
  // The discriminator is left without stale gradients.
  for (const auto& p : d.parameters()) EXPECT_FALSE(p.tensor.has_grad()) << p.name;
}

TEST(SrTrainerTest, NanAbortsAndNamesTheOp) {
  sr::Generator<float> g(tiny_generator(), 1);
  sr::Discriminator<float> d(tiny_discriminator(), 2);
  const FeatureExtractor<float> phi;
  SrTrainer<float> trainer(g, d, phi);
  Rng rng(5);
  auto batch = random_pairs(1, rng);
  batch[0].lr.mutable_data()[7] = std::numeric_limits<float>::quiet_NaN();
  try {
    trainer.train_step(batch);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_EQ(e.op(), "conv2d");
    EXPECT_NE(std::string(e.what()).find("conv2d"), std::string::npos);
  }
}

TEST(SrTrainerTest, SeededTrainingIsReproducible) {
  Rng rng(6);
  const auto data = random_pairs(3, rng);
  SrTrainingOptions opts;
  opts.steps = 4;
  opts.batch_size = 2;
  auto run = [&] {
    sr::Generator<float> g(tiny_generator(), 1);
    sr::Discriminator<float> d(tiny_discriminator(), 2);
    const FeatureExtractor<float> phi;
    return train_sr(g, d, phi, data, opts);
  };
  const auto a = run(), b = run();
  ASSERT_EQ(a.size(), 4u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].l_total, b[i].l_total);
    EXPECT_EQ(a[i].discriminator_loss, b[i].discriminator_loss);
  }
}

TEST(SrTrainerTest, LossHistoryCsv) {
  std::vector<LossReport> h{{0, 0.5, 0.25, 0.0, 0.2525, 1.5}};
  std::ostringstream out;
  write_loss_history_csv(out, h);
  EXPECT_EQ(out.str(), "step,l_gan,l_perceptual,l_total,d_loss\n0,0.5,0.25,0.2525,1.5\n");
}

}  // namespace
}  // namespace srdet::train
