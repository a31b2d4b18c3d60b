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

#include <gtest/gtest.h>

#include "srdet/det/checkpoint.hpp"
#include "srdet/sr/checkpoint.hpp"
#include "test_util.hpp"

namespace srdet::sr {
namespace {

using testing::random_tensor;

GeneratorSpec small_spec() {
  GeneratorSpec s;
  s.num_rrdb = 1;
  s.base_channels = 8;
  s.growth_channels = 4;
  return s;
}

TEST(Crc32Test, KnownVector) {
  const std::string s = "123456789";
  EXPECT_EQ(crc32({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()}), 0xCBF43926u);
}

TEST(CheckpointTest, SaveLoadForwardIsBitwiseIdentical) {
  const auto dir = testing::temp_dir("ckpt_roundtrip");
  const Generator<float> g(small_spec(), 21);
  Rng rng(1);
  const auto lr = random_tensor<float>({3, 6, 5}, rng, 0, 1);
  const auto before = g.forward(lr);
  save_checkpoint(g, dir / "g.srdt");
  const Generator<float> loaded = load_generator(dir / "g.srdt");
  EXPECT_EQ(loaded.spec(), g.spec());
  EXPECT_TRUE(testing::bitwise_equal(loaded.forward(lr), before));
}

TEST(CheckpointTest, EncodeDecodeRoundTrip) {
  const std::vector<CheckpointTensor> t{{"a", {2, 2}, {1, 2, 3, 4}}, {"b.c", {1}, {-0.5f}}};
  const auto bytes = encode_checkpoint(t);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "SRDT");
  const auto back = decode_checkpoint(bytes);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].name, "b.c");
  EXPECT_EQ(back[0].shape, (Shape{2, 2}));
  EXPECT_EQ(back[0].data, t[0].data);
}

TEST(CheckpointTest, EveryTruncationIsATypedError) {
  const Generator<float> g(small_spec(), 2);
  const CheckpointTensor meta = generator_meta(g.spec());
  const auto bytes = encode_checkpoint(to_checkpoint(g.parameters(), &meta));
  // Every prefix of the header region, then a stride through the payload.
  for (std::size_t n = 0; n < bytes.size(); n += n < 64 ? 1 : 997) {
    const std::span<const std::uint8_t> prefix(bytes.data(), n);
    try {
      decode_checkpoint(prefix);
      ADD_FAILURE() << "prefix of " << n << " bytes decoded";
    } catch (const CheckpointError& e) {
      EXPECT_TRUE(e.kind() == CheckpointErrorKind::kTruncated ||
                  e.kind() == CheckpointErrorKind::kBadMagic)
          << n << ": " << e.what();
    }
  }
}

TEST(CheckpointTest, CorruptionIsDetected) {
  const Generator<float> g(small_spec(), 2);
  const CheckpointTensor meta = generator_meta(g.spec());
  const auto bytes = encode_checkpoint(to_checkpoint(g.parameters(), &meta));
  auto flipped = bytes;
  flipped[flipped.size() / 2] ^= 0x40;
  try {
    decode_checkpoint(flipped);
    FAIL();
  } catch (const CheckpointError& e) {
    EXPECT_EQ(e.kind(), CheckpointErrorKind::kChecksum);
  }
  auto magic = bytes;
  magic[0] = 'X';
  try {
    decode_checkpoint(magic);
    FAIL();
  } catch (const CheckpointError& e) {
    EXPECT_EQ(e.kind(), CheckpointErrorKind::kBadMagic);
  }
}

TEST(CheckpointTest, SpecMismatchAndMissingFile) {
  const auto dir = testing::temp_dir("ckpt_mismatch");
  const Generator<float> g(small_spec(), 2);
  save_checkpoint(g, dir / "g.srdt");
  GeneratorSpec other = small_spec();
  other.num_rrdb = 2;
  Generator<float> h(other, 2);
  try {
    load_checkpoint(h, dir / "g.srdt");
    FAIL();
  } catch (const CheckpointError& e) {
    EXPECT_EQ(e.kind(), CheckpointErrorKind::kSpecMismatch);
  }
  try {
    load_generator(dir / "missing.srdt");
    FAIL();
  } catch (const CheckpointError& e) {
    EXPECT_EQ(e.kind(), CheckpointErrorKind::kIo);
  }
  // A generator checkpoint is not a detector checkpoint.
  EXPECT_THROW(det::load_detector(dir / "g.srdt"), CheckpointError);
}

TEST(CheckpointTest, DetectorRoundTrip) {
  const auto dir = testing::temp_dir("ckpt_det");
  det::DetectorSpec spec;
  spec.anchors.scales = {1.5, 2.5};
  spec.fc_dim = 16;
  const det::Detector<float> d(spec, 4);
  det::save_checkpoint(d, dir / "d.srdt");
  const det::Detector<float> back = det::load_detector(dir / "d.srdt");
  EXPECT_EQ(back.spec(), d.spec());
  const auto pa = d.parameters(), pb = back.parameters();
  ASSERT_EQ(pa.size(), pb.size());
  for (std::size_t i = 0; i < pa.size(); ++i) {
    EXPECT_TRUE(testing::bitwise_equal(pa[i].tensor, pb[i].tensor)) << pa[i].name;
  }
}

TEST(CheckpointTest, DiscriminatorRoundTrip) {
  const auto dir = testing::temp_dir("ckpt_disc");
  const Discriminator<float> d(DiscriminatorSpec{}, 8);
  save_checkpoint(d, dir / "d.srdt");
  Discriminator<float> e(DiscriminatorSpec{}, 9);
  load_checkpoint(e, dir / "d.srdt");
  Rng rng(3);
  const auto x = random_tensor<float>({3, 32, 32}, rng, 0, 1);
  EXPECT_TRUE(testing::bitwise_equal(d.forward(x), e.forward(x)));
}

}  // namespace
}  // namespace srdet::sr
