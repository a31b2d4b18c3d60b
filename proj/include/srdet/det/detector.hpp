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
#include <span>
#include <vector>

#include "srdet/core/layers.hpp"
#include "srdet/core/ops.hpp"
#include "srdet/core/tensor.hpp"
#include "srdet/det/box.hpp"

namespace srdet::det {

struct DetectorSpec {
  std::size_t input_channels = 3;
  // One 3x3 stride-2 conv + leaky_relu per entry.
  std::vector<std::size_t> backbone_channels{16, 32, 32};
  std::size_t rpn_channels = 32;
  // anchors.feature_stride must equal 2^backbone_channels.size().
  AnchorConfig anchors;
  std::size_t num_classes = 3;
  std::size_t pool_size = 4;
  std::size_t fc_dim = 128;

  void validate() const;
  std::size_t feature_stride() const { return std::size_t{1} << backbone_channels.size(); }
  bool operator==(const DetectorSpec&) const = default;
};

template <typename T>
struct RpnOutput {
  Tensor<T> objectness_logits;  // [A, Hf, Wf]
  Tensor<T> objectness;         // sigmoid of the logits
  Tensor<T> deltas;             // [4A, Hf, Wf]; channel 4a + k is delta k of anchor a
};

template <typename T>
struct HeadOutput {
  Tensor<T> class_logits;  // [K + 1, 1, 1], index 0 is background
  Tensor<T> box_deltas;    // [4K, 1, 1]; class c uses channels 4(c - 1) .. 4(c - 1) + 3
  std::vector<double> class_probs;
};

template <typename T>
class Detector {
 public:
  static constexpr double kLeakySlope = 0.2;

  Detector(const DetectorSpec& spec, std::uint64_t seed);

  // [C, H, W] image -> [C', ceil(H / stride), ceil(W / stride)] features.
  Tensor<T> backbone(const Tensor<T>& image, Tape<T>* tape = nullptr) const;
  RpnOutput<T> rpn(const Tensor<T>& features, Tape<T>* tape = nullptr) const;
  // pooled: [C', pool, pool].
  HeadOutput<T> head(const Tensor<T>& pooled, Tape<T>* tape = nullptr) const;

  const DetectorSpec& spec() const { return spec_; }
  std::vector<NamedTensor<T>> parameters() const;

  Conv2d<T>& rpn_objectness_layer() { return rpn_obj_; }
  Conv2d<T>& rpn_delta_layer() { return rpn_delta_; }
  Conv2d<T>& class_layer() { return cls_; }
  Conv2d<T>& box_layer() { return box_; }

 private:
  DetectorSpec spec_;
  std::vector<Conv2d<T>> backbone_;
  Conv2d<T> rpn_conv_;
  Conv2d<T> rpn_obj_;
  Conv2d<T> rpn_delta_;
  Conv2d<T> fc1_;
  Conv2d<T> fc2_;
  Conv2d<T> cls_;
  Conv2d<T> box_;
};

extern template class Detector<float>;
extern template class Detector<double>;

struct ProposalConfig {
  std::size_t pre_nms_k = 300;
  std::size_t post_nms_k = 50;
  double nms_iou = 0.7;
  // Boxes narrower or shorter than this many pixels after clipping are dropped.
  double min_size = 1.0;

  void validate() const;
};

struct Proposal {
  BoundingBox box;
  double score = 0.0;
  std::size_t anchor_index = 0;
};

// Decode every anchor, clip, drop small boxes, keep top pre_nms_k by
// objectness, NMS, keep top post_nms_k. Sorted by descending score with the
// lower anchor index first on ties.
template <typename T>
std::vector<Proposal> select_proposals(const RpnOutput<T>& rpn, std::span<const BoundingBox> anchors,
                                       double image_w, double image_h, const ProposalConfig& cfg);

// Feature-cell window of an image-space roi: floor(min / stride) to
// ceil(max / stride), clamped to the map. DomainError if the window is empty.
ops::CellWindow roi_cells(const BoundingBox& roi, std::size_t feature_stride, std::size_t feature_h,
                          std::size_t feature_w);

template <typename T>
Tensor<T> roi_pool(const Tensor<T>& features, const BoundingBox& roi, std::size_t pool,
                   std::size_t feature_stride, Tape<T>* tape = nullptr);

struct DetectConfig {
  ProposalConfig proposals;
  double score_threshold = 0.5;
  double nms_iou = 0.5;
  std::size_t max_detections = 100;

  void validate() const;
};

template <typename T>
std::vector<Detection> detect(const Detector<T>& detector, const Tensor<T>& image,
                              const DetectConfig& cfg);

}  // namespace srdet::det
