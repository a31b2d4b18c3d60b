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

#include "srdet/det/box.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

#include "srdet/core/errors.hpp"

namespace srdet::det {

std::string to_string(const BoundingBox& b) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "(%g, %g, %g, %g)", b.x_min, b.y_min, b.x_max, b.y_max);
  return buf;
}

double iou(const BoundingBox& a, const BoundingBox& b) {
  const double area_a = a.area();
  const double area_b = b.area();
  if (area_a <= 0.0 || area_b <= 0.0) return 0.0;
  const double iw = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double ih = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  return std::clamp(inter / (area_a + area_b - inter), 0.0, 1.0);
}

BoundingBox clip_box(const BoundingBox& b, double width, double height) {
  return {std::clamp(b.x_min, 0.0, width), std::clamp(b.y_min, 0.0, height),
          std::clamp(b.x_max, 0.0, width), std::clamp(b.y_max, 0.0, height)};
}

BoxDeltas encode_box(const BoundingBox& anchor, const BoundingBox& target) {
  if (!(anchor.width() > 0.0 && anchor.height() > 0.0)) {
    throw DomainError("encode_box: anchor " + to_string(anchor) + " has non-positive size");
  }
  if (!(target.width() > 0.0 && target.height() > 0.0)) {
    throw DomainError("encode_box: target " + to_string(target) + " has non-positive size");
  }
  return {(target.center_x() - anchor.center_x()) / anchor.width(),
          (target.center_y() - anchor.center_y()) / anchor.height(),
          std::log(target.width() / anchor.width()), std::log(target.height() / anchor.height())};
}

BoxDeltas clamp_size_deltas(BoxDeltas d) {
  d[2] = std::min(d[2], kMaxLogSizeDelta);
  d[3] = std::min(d[3], kMaxLogSizeDelta);
  return d;
}

BoundingBox decode_box(const BoundingBox& anchor, const BoxDeltas& d) {
  const double cx = anchor.center_x() + d[0] * anchor.width();
  const double cy = anchor.center_y() + d[1] * anchor.height();
  const double w = anchor.width() * std::exp(d[2]);
  const double h = anchor.height() * std::exp(d[3]);
  return {cx - 0.5 * w, cy - 0.5 * h, cx + 0.5 * w, cy + 0.5 * h};
}

BoundingBox decode_box(const BoundingBox& anchor, const BoxDeltas& deltas, double width,
                       double height) {
  return clip_box(decode_box(anchor, deltas), width, height);
}

std::vector<std::size_t> score_order(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

std::vector<std::size_t> nms(std::span<const BoundingBox> boxes, std::span<const double> scores,
                             double iou_threshold) {
  if (boxes.size() != scores.size()) {
    throw ShapeError("nms: " + std::to_string(boxes.size()) + " boxes but " +
                     std::to_string(scores.size()) + " scores");
  }
  std::vector<std::size_t> kept;
  for (std::size_t idx : score_order(scores)) {
    bool suppressed = false;
    for (std::size_t k : kept) {
      if (iou(boxes[idx], boxes[k]) > iou_threshold) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) kept.push_back(idx);
  }
  return kept;
}

void AnchorConfig::validate() const {
  if (scales.empty() || aspect_ratios.empty()) {
    throw ValidationError("anchor config needs at least one scale and one aspect ratio");
  }
  for (double s : scales) {
    if (!(s > 0.0) || !std::isfinite(s)) throw ValidationError("anchor scales must be positive");
  }
  for (double r : aspect_ratios) {
    if (!(r > 0.0) || !std::isfinite(r)) {
      throw ValidationError("anchor aspect ratios must be positive");
    }
  }
  if (feature_stride == 0) throw ValidationError("anchor feature_stride must be positive");
}

std::vector<BoundingBox> generate_anchors(const AnchorConfig& cfg, std::size_t feature_h,
                                          std::size_t feature_w) {
  cfg.validate();
  const double stride = static_cast<double>(cfg.feature_stride);
  std::vector<BoundingBox> anchors;
  anchors.reserve(feature_h * feature_w * cfg.per_location());
  for (std::size_t i = 0; i < feature_h; ++i) {
    for (std::size_t j = 0; j < feature_w; ++j) {
      const double cx = (static_cast<double>(j) + 0.5) * stride;
      const double cy = (static_cast<double>(i) + 0.5) * stride;
      for (double s : cfg.scales) {
        for (double r : cfg.aspect_ratios) {
          const double w = s * stride * std::sqrt(r);
          const double h = s * stride / std::sqrt(r);
          anchors.push_back({cx - 0.5 * w, cy - 0.5 * h, cx + 0.5 * w, cy + 0.5 * h});
        }
      }
    }
  }
  return anchors;
}

}  // namespace srdet::det
