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

#include <algorithm>
#include <fstream>
#include <set>

#include <gtest/gtest.h>

#include "srdet/io/annotate.hpp"
#include "srdet/io/annotations.hpp"
#include "srdet/io/config.hpp"
#include "srdet/io/dataset.hpp"
#include "srdet/io/ppm.hpp"
#include "test_util.hpp"

namespace srdet::io {
namespace {

std::vector<std::uint8_t> bytes_of(const std::string& s) { return {s.begin(), s.end()}; }

ParseError ppm_error(const std::string& s) {
  try {
    decode_ppm(bytes_of(s));
  } catch (const ParseError& e) {
    return e;
  }
  ADD_FAILURE() << "decoded: " << s;
  return ParseError(ParseErrorKind::kIo, 0, "");
}

TEST(PpmTest, DecodesChannelFirst) {
  std::string s = "P6\n# comment\n2 1\n255\n";
  s += std::string{'\xff', '\x00', '\x33', '\x00', '\x80', '\x00'};
  const auto img = decode_ppm(bytes_of(s));
  EXPECT_EQ(img.shape(), (Shape{3, 1, 2}));
  EXPECT_EQ(img.data()[0], 1.0f);
  EXPECT_EQ(img.data()[1], 0.0f);
  EXPECT_EQ(img.data()[3], 128.0f / 255.0f);
  EXPECT_EQ(img.data()[4], 0.2f);
  const auto gray = decode_ppm(bytes_of(std::string("P5 1 1 255\n") + '\x10'));
  EXPECT_EQ(gray.shape(), (Shape{1, 1, 1}));
}

TEST(PpmTest, TruncatedRasterReportsByteOffset) {
  // 11-byte header plus 11 of the 48 raster bytes.
  const ParseError e = ppm_error("P6\n4 4\n255\n" + std::string(11, 'x'));
  EXPECT_EQ(e.kind(), ParseErrorKind::kTruncated);
  EXPECT_EQ(e.offset(), 22u);
}

TEST(PpmTest, HeaderErrors) {
  EXPECT_EQ(ppm_error("P3\n1 1\n255\n").kind(), ParseErrorKind::kBadMagic);
  EXPECT_EQ(ppm_error("P6\n1 1\n65535\n").kind(), ParseErrorKind::kUnsupportedMaxval);
  EXPECT_EQ(ppm_error("P6\n0 1\n255\n").kind(), ParseErrorKind::kBadHeader);
  EXPECT_EQ(ppm_error("P6\n99999999999999999999 1\n255\n").kind(), ParseErrorKind::kOverflow);
  EXPECT_EQ(ppm_error("P6\n4 4").kind(), ParseErrorKind::kTruncated);
  EXPECT_EQ(ppm_error("P").kind(), ParseErrorKind::kTruncated);
}

TEST(PpmTest, EncodeDecodeIsIdempotent) {
  Rng rng(1);
  const auto img = testing::random_tensor<float>({3, 5, 7}, rng, 0, 1);
  const auto bytes = encode_ppm(img);
  const auto once = decode_ppm(bytes);
  EXPECT_EQ(encode_ppm(once), bytes);
  EXPECT_LE(testing::max_abs_diff(once, img), 0.5 / 255.0 + 1e-7);
  EXPECT_THROW(encode_ppm(Tensor<float>::full({3, 1, 1}, 1.5f)), DomainError);

  const auto dir = testing::temp_dir("ppm");
  write_ppm(once, dir / "a.ppm");
  EXPECT_TRUE(testing::bitwise_equal(read_ppm(dir / "a.ppm"), once));
  try {
    read_ppm(dir / "missing.ppm");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.kind(), ParseErrorKind::kIo);
  }
}

TEST(AnnotationsTest, ParseAndFormat) {
  const auto gts = parse_annotations("# header\n1 0 0 4 4\n\n2 1.5 2 8 9.25\n");
  ASSERT_EQ(gts.size(), 2u);
  EXPECT_EQ(gts[1].class_id, 2);
  EXPECT_EQ(gts[1].box, (det::BoundingBox{1.5, 2, 8, 9.25}));
  EXPECT_EQ(parse_annotations(format_annotations(gts)), gts);
  try {
    parse_annotations("1 0 0 4 4\n1 0 0 4\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.kind(), ParseErrorKind::kMalformed);
    EXPECT_EQ(e.offset(), 10u);
  }
  EXPECT_THROW(parse_annotations("1 4 4 0 0\n"), ParseError);
}

TEST(AnnotationsTest, DetectionsRoundTrip) {
  const std::vector<det::Detection> dets{{{1, 2, 3, 4}, 2, 0.875}, {{0, 0, 10.5, 7}, 1, 0.5}};
  EXPECT_EQ(format_detections(dets),
            "2 0.875000 1.000000 2.000000 3.000000 4.000000\n"
            "1 0.500000 0.000000 0.000000 10.500000 7.000000\n");
  EXPECT_EQ(parse_detections(format_detections(dets)), dets);
}

TEST(DatasetTest, SyntheticSamplesAreConsistent) {
  SyntheticOptions opts;
  opts.count = 20;
  const auto samples = make_synthetic_samples(opts);
  ASSERT_EQ(samples.size(), 20u);
  std::set<int> classes;
  for (const auto& s : samples) {
    EXPECT_EQ(s.hr.shape(), (Shape{3, 48, 48}));
    EXPECT_EQ(s.lr.shape(), (Shape{3, 12, 12}));
    EXPECT_GE(s.gts.size(), opts.min_objects);
    EXPECT_LE(s.gts.size(), opts.max_objects);
    for (const auto& g : s.gts) {
      classes.insert(g.class_id);
      EXPECT_GE(g.box.x_min, 0.0);
      EXPECT_GE(g.box.y_min, 0.0);
      EXPECT_LE(g.box.x_max, 48.0);
      EXPECT_LE(g.box.y_max, 48.0);
      EXPECT_GT(g.box.area(), 0.0);
    }
    for (std::size_t i = 0; i < s.gts.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j) EXPECT_EQ(det::iou(s.gts[i].box, s.gts[j].box), 0.0);
    }
    // LR is the box-filtered HR, up to 8-bit quantization.
    EXPECT_LE(testing::max_abs_diff(box_downsample(s.hr, 4), s.lr), 0.5 / 255.0 + 1e-6);
  }
  EXPECT_EQ(classes, (std::set<int>{kRectangle, kDisk, kTriangle}));
  opts.count = 0;
  EXPECT_TRUE(make_synthetic_samples(opts).empty());
}

TEST(DatasetTest, BoxFilterAndUpsample) {
  const Tensor<float> img({1, 2, 4}, {0, 1, 2, 3, 4, 5, 6, 7});
  const auto down = box_downsample(img, 2);
  EXPECT_EQ(down.shape(), (Shape{1, 1, 2}));
  EXPECT_EQ(down.data()[0], 2.5f);
  EXPECT_EQ(down.data()[1], 4.5f);
  EXPECT_THROW(box_downsample(img, 3), ValidationError);
  const auto up = nearest_upsample(down, 2);
  EXPECT_EQ(up.shape(), (Shape{1, 2, 4}));
  EXPECT_EQ(up.data()[5], 2.5f);
  EXPECT_EQ(up.data()[7], 4.5f);
}

TEST(DatasetTest, ManifestRoundTripMatchesMemory) {
  const auto dir = testing::temp_dir("dataset");
  SyntheticOptions opts;
  opts.count = 4;
  const auto records = make_synthetic_dataset(opts, dir);
  ASSERT_EQ(records.size(), 4u);
  const auto loaded = load_dataset(dir / "manifest.tsv", opts.scale);
  const auto memory = make_synthetic_samples(opts);
  ASSERT_EQ(loaded.size(), memory.size());
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    EXPECT_TRUE(testing::bitwise_equal(loaded[i].hr, memory[i].hr));
    EXPECT_TRUE(testing::bitwise_equal(loaded[i].lr, memory[i].lr));
    EXPECT_EQ(loaded[i].gts, memory[i].gts);
  }
  EXPECT_THROW(load_sample(read_manifest(dir / "manifest.tsv")[0], 3), DatasetError);
  EXPECT_THROW(read_manifest(dir / "nope.tsv"), Error);
  opts.count = 0;
  const auto empty_dir = testing::temp_dir("dataset_empty");
  EXPECT_TRUE(make_synthetic_dataset(opts, empty_dir).empty());
  EXPECT_TRUE(load_dataset(empty_dir / "manifest.tsv", opts.scale).empty());
}

TEST(DatasetTest, SplitIsSeededAndDisjoint) {
  const Split a = split_indices(50, 0.2, 1);
  EXPECT_EQ(a.test.size(), 10u);
  EXPECT_EQ(a.train.size(), 40u);
  EXPECT_TRUE(std::is_sorted(a.test.begin(), a.test.end()));
  std::vector<std::size_t> all = a.train;
  all.insert(all.end(), a.test.begin(), a.test.end());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < 50; ++i) EXPECT_EQ(all[i], i);
  EXPECT_EQ(split_indices(50, 0.2, 1).test, a.test);
  EXPECT_NE(split_indices(50, 0.2, 2).test, a.test);
}

TEST(ConfigTest, ShippedDefaultParses) {
  const PipelineConfig cfg = load_pipeline_config(testing::source_path("configs/default.cfg"));
  EXPECT_EQ(cfg.data.synthetic.count, 250u);
  EXPECT_EQ(cfg.sr.generator.scale_factor, 4u);
  EXPECT_EQ(cfg.det.spec.anchors.scales, (std::vector<double>{1.5, 2.5}));
  EXPECT_EQ(cfg.det.spec.anchors.feature_stride, 8u);
  EXPECT_EQ(cfg.eval.iou_threshold, 0.5);
}

TEST(ConfigTest, RejectsBadInput) {
  EXPECT_THROW(parse_pipeline_config("data.nope = 1\n"), ValidationError);
  EXPECT_THROW(parse_pipeline_config("data.count = 5\ndata.count = 6\n"), ValidationError);
  EXPECT_THROW(parse_pipeline_config("data.count 5\n"), ValidationError);
  EXPECT_THROW(parse_pipeline_config("data.count = -5\n"), ValidationError);
  EXPECT_THROW(parse_pipeline_config("sr.base_channels = 0\n"), ValidationError);
  EXPECT_THROW(parse_pipeline_config("sr.scale = 3\n"), ValidationError);
  EXPECT_THROW(parse_pipeline_config("eval.iou_threshold = 1.5\n"), ValidationError);
  try {
    parse_pipeline_config("# ok\n\ndata.count\n");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(ConfigTest, FormatRoundTrips) {
  const PipelineConfig cfg = load_pipeline_config(testing::source_path("configs/default.cfg"));
  const std::string text = format_pipeline_config(cfg);
  EXPECT_EQ(format_pipeline_config(parse_pipeline_config(text)), text);
  EXPECT_EQ(format_pipeline_config(parse_pipeline_config("")),
            format_pipeline_config(PipelineConfig{}));
}

float px(const Tensor<float>& img, std::size_t c, std::size_t y, std::size_t x) {
  return img.data()[(c * img.dim(1) + y) * img.dim(2) + x];
}

bool is_red(const Tensor<float>& img, std::size_t y, std::size_t x) {
  return px(img, 0, y, x) == 1.0f && px(img, 1, y, x) == 0.0f && px(img, 2, y, x) == 0.0f;
}

TEST(AnnotateTest, NoDetectionsIsANoOp) {
  Rng rng(2);
  const auto img = testing::random_tensor<float>({3, 20, 20}, rng, 0, 1);
  EXPECT_TRUE(testing::bitwise_equal(annotate_image(img, {}, default_class_names()), img));
}

TEST(AnnotateTest, OutlineOnlyTouchesTheBorder) {
  const auto img = Tensor<float>::full({3, 20, 20}, 0.5f);
  const std::vector<det::Detection> d{{{4, 5, 10, 12}, 1, 0.9}};
  const auto out = annotate_image(img, d, default_class_names(), {false});
  for (std::size_t y = 0; y < 20; ++y) {
    for (std::size_t x = 0; x < 20; ++x) {
      const bool border = (y >= 5 && y <= 11 && (x == 4 || x == 9)) ||
                          (x >= 4 && x <= 9 && (y == 5 || y == 11));
      if (border) {
        EXPECT_TRUE(is_red(out, y, x)) << y << "," << x;
      } else {
        EXPECT_EQ(px(out, 0, y, x), 0.5f) << y << "," << x;
      }
    }
  }
}

TEST(AnnotateTest, BestScoreIsDrawnLast) {
  const auto img = Tensor<float>::full({3, 30, 30}, 0.0f);
  // Both label strips land on the same rows; the higher score's strip wins.
  const std::vector<det::Detection> d{{{2, 10, 28, 28}, 1, 0.9}, {{2, 10, 28, 20}, 2, 0.4}};
  const auto out = annotate_image(img, d, default_class_names());
  const auto only_best = annotate_image(img, {d[0]}, default_class_names());
  const PixelRect l = label_rect(d[0].box, detection_label(d[0], default_class_names()), 30, 30);
  for (long y = l.y0; y <= l.y1; ++y) {
    for (long x = l.x0; x <= l.x1; ++x) {
      for (std::size_t c = 0; c < 3; ++c) {
        EXPECT_EQ(px(out, c, y, x), px(only_best, c, y, x)) << y << "," << x;
      }
    }
  }
}

TEST(AnnotateTest, Labels) {
  EXPECT_EQ(detection_label({{}, 2, 0.806}, default_class_names()), "disk 0.81");
  EXPECT_EQ(detection_label({{}, 7, 0.5}, default_class_names()), "cls7 0.50");
  EXPECT_EQ(label_strip_width("ab"), 2 * kGlyphAdvance + 1);
  EXPECT_EQ(glyph('a'), glyph('A'));
  EXPECT_TRUE(outline_rect({40, 40, 50, 50}, 20, 20).empty());
}

}  // namespace
}  // namespace srdet::io
