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
#include <span>
#include <string>
#include <vector>

#include "srdet/core/tensor.hpp"
#include "srdet/det/box.hpp"

namespace srdet::eval {

using det::Detection;
using det::GroundTruth;

struct MatchPair {
  std::size_t detection = 0;
  std::size_t ground_truth = 0;
  double iou = 0.0;
};

struct MatchResult {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::vector<MatchPair> pairs;

  // Adds counts from another image; pairs are not carried over.
  MatchResult& operator+=(const MatchResult& other);
};

// Greedy matching: detections in descending score (ties by index), each taking
// the unmatched same-class ground truth of highest IoU >= iou_threshold.
MatchResult match_detections(std::span<const Detection> dets, std::span<const GroundTruth> gts,
                             double iou_threshold = 0.5);

// Per-detection true-positive flags produced by match_detections.
std::vector<bool> true_positive_flags(const MatchResult& m, std::size_t num_detections);

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  // tp / (tp + fp + fn); 1 when all three counts are 0.
  double accuracy = 0.0;
};

Prf prf_metrics(const MatchResult& m);

struct ImageResult {
  std::vector<Detection> detections;
  std::vector<GroundTruth> ground_truths;
};

// All-point interpolated AP over the ranking of every detection in every
// image. No ground truths and no detections gives 1; no ground truths with
// detections gives 0.
double average_precision(std::span<const ImageResult> images, double iou_threshold = 0.5);
double average_precision(std::span<const Detection> dets, std::span<const GroundTruth> gts,
                         double iou_threshold = 0.5);

struct Psnr {
  double db = 0.0;
  bool infinite = false;

  std::string str() const;
};

// 10 log10(peak^2 / MSE); identical images give the infinite marker.
Psnr psnr(const Tensor<float>& a, const Tensor<float>& b, double peak = 1.0);

}  // namespace srdet::eval
