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
#include <span>
#include <vector>

#include "srdet/core/rng.hpp"
#include "srdet/det/detector.hpp"
#include "srdet/train/adam.hpp"

namespace srdet::det {

struct DetSample {
  Tensor<float> image;
  std::vector<GroundTruth> gts;
};

struct DetTrainingOptions {
  std::size_t steps = 1000;
  std::size_t batch_size = 2;
  std::uint64_t seed = 1;
  train::AdamOptions adam;

  // Anchor is positive at IoU >= rpn_positive_iou with some ground truth or
  // when it is the best anchor for one; negative at IoU <= rpn_negative_iou.
  double rpn_positive_iou = 0.7;
  double rpn_negative_iou = 0.3;
  std::size_t rpn_batch = 64;
  double rpn_positive_fraction = 0.5;

  // RoIs (proposals plus ground truths) are foreground at IoU >= this.
  double roi_foreground_iou = 0.5;
  std::size_t roi_batch = 32;
  double roi_foreground_fraction = 0.25;
  ProposalConfig proposals{300, 64, 0.7, 1.0};

  double smooth_l1_beta = 1.0 / 9.0;

  void validate() const;
};

struct DetLossReport {
  long step = 0;
  double rpn_objectness = 0.0;
  double rpn_box = 0.0;
  double head_class = 0.0;
  double head_box = 0.0;
  double total = 0.0;
};

struct DetLoss {
  Tensor<float> total;
  DetLossReport parts;
};

// Anchor labels: 1 positive, 0 negative, -1 ignored. matched_gt holds the
// ground-truth index each anchor is regressed towards.
struct AnchorTargets {
  std::vector<int> labels;
  std::vector<std::size_t> matched_gt;
};

AnchorTargets label_anchors(std::span<const BoundingBox> anchors, std::span<const GroundTruth> gts,
                            double positive_iou, double negative_iou);

// Four-part Faster R-CNN style loss for one image. Sampling draws from rng.
DetLoss detector_loss(const Detector<float>& detector, const DetSample& sample,
                      const DetTrainingOptions& options, Rng& rng, Tape<float>* tape);

class DetTrainer {
 public:
  DetTrainer(Detector<float>& detector, const DetTrainingOptions& options);

  DetLossReport train_step(std::span<const DetSample> batch);

 private:
  Detector<float>& detector_;
  DetTrainingOptions options_;
  train::Adam<float> opt_;
  Rng rng_;
  long step_ = 0;
};

std::vector<DetLossReport> train_detector(
    Detector<float>& detector, std::span<const DetSample> data, const DetTrainingOptions& options,
    const std::function<void(const DetLossReport&)>& on_step = {});

}  // namespace srdet::det
