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
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace srdet::det {

struct BoundingBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return valid() ? width() * height() : 0.0; }
  double center_x() const { return 0.5 * (x_min + x_max); }
  double center_y() const { return 0.5 * (y_min + y_max); }
  bool valid() const { return x_min <= x_max && y_min <= y_max; }
  bool operator==(const BoundingBox&) const = default;
};

std::string to_string(const BoundingBox& b);

// Class 0 is background; real detections and ground truths use ids >= 1.
struct Detection {
  BoundingBox box;
  int class_id = 0;
  double score = 0.0;
  bool operator==(const Detection&) const = default;
};

struct GroundTruth {
  int class_id = 0;
  BoundingBox box;
  bool operator==(const GroundTruth&) const = default;
};

// Zero for disjoint or degenerate boxes.
double iou(const BoundingBox& a, const BoundingBox& b);

BoundingBox clip_box(const BoundingBox& b, double width, double height);

using BoxDeltas = std::array<double, 4>;

// Upper bound applied to predicted log-size deltas before decoding network
// outputs, so exp() cannot overflow.
inline const double kMaxLogSizeDelta = std::log(1000.0 / 16.0);

// tx = (cx_t - cx_a) / w_a, ty = (cy_t - cy_a) / h_a, tw = log(w_t / w_a),
// th = log(h_t / h_a). DomainError for non-positive anchor or target size.
BoxDeltas encode_box(const BoundingBox& anchor, const BoundingBox& target);
BoxDeltas clamp_size_deltas(BoxDeltas d);
// Exact inverse of encode_box; no clipping.
BoundingBox decode_box(const BoundingBox& anchor, const BoxDeltas& deltas);
// Decode followed by clipping into [0, width] x [0, height].
BoundingBox decode_box(const BoundingBox& anchor, const BoxDeltas& deltas, double width,
                       double height);

// Greedy non-maximum suppression. Boxes are visited by descending score, ties
// broken by lower index; a box is dropped when its IoU with an already kept
// box exceeds iou_threshold. Returns kept indices in visiting order.
std::vector<std::size_t> nms(std::span<const BoundingBox> boxes, std::span<const double> scores,
                             double iou_threshold);

// Indices sorted by descending score, ties by ascending index.
std::vector<std::size_t> score_order(std::span<const double> scores);

struct AnchorConfig {
  // In feature-cell units: an anchor of scale s spans s * feature_stride pixels.
  std::vector<double> scales{8.0, 16.0, 32.0};
  std::vector<double> aspect_ratios{0.5, 1.0, 2.0};
  std::size_t feature_stride = 8;

  void validate() const;
  std::size_t per_location() const { return scales.size() * aspect_ratios.size(); }
  bool operator==(const AnchorConfig&) const = default;
};

// Anchor ((i * feature_w + j) * S + s) * R + r is centered at
// ((j + 0.5) * stride, (i + 0.5) * stride) with width scale * stride * sqrt(r)
// and height scale * stride / sqrt(r).
std::vector<BoundingBox> generate_anchors(const AnchorConfig& cfg, std::size_t feature_h,
                                          std::size_t feature_w);

}  // namespace srdet::det
