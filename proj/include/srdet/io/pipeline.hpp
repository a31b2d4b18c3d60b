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

#include <array>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "srdet/det/detector.hpp"
#include "srdet/eval/metrics.hpp"
#include "srdet/eval/report.hpp"
#include "srdet/io/config.hpp"
#include "srdet/io/dataset.hpp"
#include "srdet/sr/generator.hpp"
#include "srdet/train/losses.hpp"

namespace srdet::io {

struct PipelineResult {
  Tensor<float> sr;
  std::vector<det::Detection> detections;
};

// LR image -> generator -> detector.
class Pipeline {
 public:
  Pipeline(sr::Generator<float> generator, det::Detector<float> detector, det::DetectConfig cfg);

  // Both checkpoints are checked for existence before either is read.
  static Pipeline load(const std::filesystem::path& generator_ckpt,
                       const std::filesystem::path& detector_ckpt, const det::DetectConfig& cfg);

  PipelineResult run(const Tensor<float>& lr) const;

  const sr::Generator<float>& generator() const { return generator_; }
  const det::Detector<float>& detector() const { return detector_; }

 private:
  sr::Generator<float> generator_;
  det::Detector<float> detector_;
  det::DetectConfig cfg_;
};

// Runs `detector` over `images`, rescales boxes by `box_scale` and matches
// them against `gts`. Returns summed counts and AP over all images.
struct DetectionEval {
  eval::MatchResult match;
  double ap = 0.0;
};
DetectionEval evaluate_detector(const det::Detector<float>& detector,
                                const std::vector<Tensor<float>>& images,
                                const std::vector<std::vector<det::GroundTruth>>& gts,
                                const det::DetectConfig& cfg, double iou_threshold,
                                double box_scale = 1.0);

// Loads data.dir/manifest.tsv, or generates the synthetic set in memory when
// data.dir is empty.
std::vector<Sample> load_samples(const DataConfig& data);

struct SplitData {
  std::vector<Tensor<float>> hr;
  std::vector<Tensor<float>> lr;
  std::vector<std::vector<det::GroundTruth>> gts;
};
SplitData gather(const std::vector<Sample>& samples, const std::vector<std::size_t>& indices);

using Logger = std::function<void(const std::string&)>;

// Trains a fresh generator on (lr, hr) pairs; history may be null.
sr::Generator<float> train_generator(const SrConfig& cfg, const SplitData& data,
                                     std::vector<train::LossReport>* history,
                                     const Logger& log = {});

// Trains a fresh detector on `images`, whose frame is `frame_scale` times
// smaller than the HR frame the ground truths are expressed in. Anchor scales
// shrink by the same factor so anchors keep their size relative to objects.
det::Detector<float> train_detector_on(const DetConfig& cfg,
                                       const std::vector<Tensor<float>>& images,
                                       const std::vector<std::vector<det::GroundTruth>>& gts,
                                       double frame_scale, const Logger& log = {},
                                       const std::string& tag = "det");

inline constexpr std::array<const char*, 4> kArmNames = {
    "Traditional Model", "ESRGAN Only", "Faster R-CNN Only", "ESRGAN + Faster R-CNN"};

struct AblationResult {
  eval::MetricsReport report;
  std::vector<train::LossReport> sr_history;
  // Detection metrics per arm in row order; arm 2 has none.
  std::array<std::optional<eval::Prf>, 4> prf;
  eval::Psnr sr_psnr;
  eval::Psnr upsample_psnr;
};

// Four-arm experiment on the held-out split:
//   1. detector trained and run on LR images at native resolution
//   2. generator alone, scored by PSNR against HR
//   3. detector trained and run on HR images
//   4. detector trained and run on generator outputs
// A failing arm aborts the run; the error names the arm.
AblationResult run_ablation(const PipelineConfig& cfg, const Logger& log = {});

// report.csv, table.txt and loss_history.csv.
void write_ablation_outputs(const AblationResult& result, const std::filesystem::path& dir);

}  // namespace srdet::io
