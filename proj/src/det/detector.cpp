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

#include "srdet/det/detector.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "srdet/core/rng.hpp"

namespace srdet::det {

void DetectorSpec::validate() const {
  if (input_channels == 0) throw ValidationError("detector: input_channels must be positive");
  if (backbone_channels.empty()) throw ValidationError("detector: backbone needs at least one stage");
  for (std::size_t c : backbone_channels) {
    if (c == 0) throw ValidationError("detector: backbone channels must be positive");
  }
  if (rpn_channels == 0 || fc_dim == 0 || pool_size == 0) {
    throw ValidationError("detector: rpn_channels, fc_dim and pool_size must be positive");
  }
  if (num_classes == 0) throw ValidationError("detector: num_classes must be positive");
  anchors.validate();
  if (anchors.feature_stride != feature_stride()) {
    throw ValidationError("detector: anchor feature_stride " +
                          std::to_string(anchors.feature_stride) + " does not match backbone stride " +
                          std::to_string(feature_stride()));
  }
}

template <typename T>
Detector<T>::Detector(const DetectorSpec& spec, std::uint64_t seed) : spec_(spec) {
  spec_.validate();
  Rng rng(seed);
  std::size_t in = spec_.input_channels;
  for (std::size_t i = 0; i < spec_.backbone_channels.size(); ++i) {
    backbone_.emplace_back("backbone." + std::to_string(i), in, spec_.backbone_channels[i], 3, 2,
                           1, rng);
    in = spec_.backbone_channels[i];
  }
  const std::size_t a = spec_.anchors.per_location();
  rpn_conv_ = Conv2d<T>("rpn.conv", in, spec_.rpn_channels, 3, 1, 1, rng);
  rpn_obj_ = Conv2d<T>("rpn.objectness", spec_.rpn_channels, a, 1, 1, 0, rng);
  rpn_delta_ = Conv2d<T>("rpn.deltas", spec_.rpn_channels, 4 * a, 1, 1, 0, rng);
  fc1_ = Conv2d<T>("head.fc1", in, spec_.fc_dim, spec_.pool_size, 1, 0, rng);
  fc2_ = Conv2d<T>("head.fc2", spec_.fc_dim, spec_.fc_dim, 1, 1, 0, rng);
  cls_ = Conv2d<T>("head.cls", spec_.fc_dim, spec_.num_classes + 1, 1, 1, 0, rng);
  box_ = Conv2d<T>("head.box", spec_.fc_dim, 4 * spec_.num_classes, 1, 1, 0, rng);
}

template <typename T>
Tensor<T> Detector<T>::backbone(const Tensor<T>& image, Tape<T>* tape) const {
  if (image.rank() != 3 || image.dim(0) != spec_.input_channels) {
    throw ShapeError("detector: expected a [" + std::to_string(spec_.input_channels) +
                     ", H, W] image, got " + shape_str(image.shape()));
  }
  Tensor<T> h = image;
  for (const auto& conv : backbone_) h = ops::leaky_relu(conv(h, tape), kLeakySlope, tape);
  return h;
}

template <typename T>
RpnOutput<T> Detector<T>::rpn(const Tensor<T>& features, Tape<T>* tape) const {
  const Tensor<T> h = ops::leaky_relu(rpn_conv_(features, tape), kLeakySlope, tape);
  RpnOutput<T> out;
  out.objectness_logits = rpn_obj_(h, tape);
  out.objectness = ops::sigmoid(out.objectness_logits, tape);
  out.deltas = rpn_delta_(h, tape);
  return out;
}

template <typename T>
HeadOutput<T> Detector<T>::head(const Tensor<T>& pooled, Tape<T>* tape) const {
  const std::size_t p = spec_.pool_size;
  if (pooled.rank() != 3 || pooled.dim(0) != fc1_.in_channels() || pooled.dim(1) != p ||
      pooled.dim(2) != p) {
    throw ShapeError("detection head: expected pooled features [" +
                     std::to_string(fc1_.in_channels()) + ", " + std::to_string(p) + ", " +
                     std::to_string(p) + "], got " + shape_str(pooled.shape()));
  }
  Tensor<T> h = ops::leaky_relu(fc1_(pooled, tape), kLeakySlope, tape);
  h = ops::leaky_relu(fc2_(h, tape), kLeakySlope, tape);
  HeadOutput<T> out;
  out.class_logits = cls_(h, tape);
  out.box_deltas = box_(h, tape);
  const auto probs = ops::softmax<T>(out.class_logits.data());
  out.class_probs.assign(probs.begin(), probs.end());
  return out;
}

template <typename T>
std::vector<NamedTensor<T>> Detector<T>::parameters() const {
  std::vector<NamedTensor<T>> out;
  for (const auto& conv : backbone_) conv.collect(out);
  for (const auto* conv : {&rpn_conv_, &rpn_obj_, &rpn_delta_, &fc1_, &fc2_, &cls_, &box_}) {
    conv->collect(out);
  }
  return out;
}

void ProposalConfig::validate() const {
  if (pre_nms_k == 0 || post_nms_k == 0) {
    throw ValidationError("proposals: pre_nms_k and post_nms_k must be positive");
  }
  if (!(nms_iou > 0.0 && nms_iou <= 1.0)) {
    throw ValidationError("proposals: nms_iou must be in (0, 1]");
  }
  if (!(min_size >= 0.0)) throw ValidationError("proposals: min_size must be non-negative");
}

void DetectConfig::validate() const {
  proposals.validate();
  if (!(score_threshold >= 0.0 && score_threshold <= 1.0)) {
    throw ValidationError("detect: score_threshold must be in [0, 1]");
  }
  if (!(nms_iou > 0.0 && nms_iou <= 1.0)) throw ValidationError("detect: nms_iou must be in (0, 1]");
  if (max_detections == 0) throw ValidationError("detect: max_detections must be positive");
}

template <typename T>
std::vector<Proposal> select_proposals(const RpnOutput<T>& rpn, std::span<const BoundingBox> anchors,
                                       double image_w, double image_h, const ProposalConfig& cfg) {
  cfg.validate();
  const std::size_t a_count = rpn.objectness.dim(0);
  const std::size_t fh = rpn.objectness.dim(1);
  const std::size_t fw = rpn.objectness.dim(2);
  if (anchors.size() != a_count * fh * fw || rpn.deltas.dim(0) != 4 * a_count) {
    throw ShapeError("select_proposals: " + std::to_string(anchors.size()) +
                     " anchors do not match rpn output " + shape_str(rpn.objectness.shape()));
  }
  const auto obj = rpn.objectness.data();
  const auto del = rpn.deltas.data();
  const std::size_t plane = fh * fw;

  std::vector<Proposal> candidates;
  for (std::size_t i = 0; i < fh; ++i) {
    for (std::size_t j = 0; j < fw; ++j) {
      const std::size_t loc = i * fw + j;
      for (std::size_t a = 0; a < a_count; ++a) {
        const std::size_t n = loc * a_count + a;
        BoxDeltas d;
        for (std::size_t k = 0; k < 4; ++k) d[k] = static_cast<double>(del[(4 * a + k) * plane + loc]);
        const BoundingBox box = decode_box(anchors[n], clamp_size_deltas(d), image_w, image_h);
        if (box.width() < cfg.min_size || box.height() < cfg.min_size) continue;
        candidates.push_back({box, static_cast<double>(obj[a * plane + loc]), n});
      }
    }
  }
  // Candidates are in anchor order, so a stable sort keeps lower indices first.
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Proposal& x, const Proposal& y) { return x.score > y.score; });
  if (candidates.size() > cfg.pre_nms_k) candidates.resize(cfg.pre_nms_k);

  std::vector<BoundingBox> boxes;
  std::vector<double> scores;
  for (const auto& c : candidates) {
    boxes.push_back(c.box);
    scores.push_back(c.score);
  }
  std::vector<Proposal> out;
  for (std::size_t k : nms(boxes, scores, cfg.nms_iou)) {
    if (out.size() == cfg.post_nms_k) break;
    out.push_back(candidates[k]);
  }
  return out;
}

ops::CellWindow roi_cells(const BoundingBox& roi, std::size_t feature_stride, std::size_t feature_h,
                          std::size_t feature_w) {
  const double s = static_cast<double>(feature_stride);
  auto lo = [&](double v, std::size_t limit) {
    return static_cast<std::size_t>(std::clamp(std::floor(v / s), 0.0, static_cast<double>(limit)));
  };
  auto hi = [&](double v, std::size_t limit) {
    return static_cast<std::size_t>(std::clamp(std::ceil(v / s), 0.0, static_cast<double>(limit)));
  };
  ops::CellWindow w{lo(roi.y_min, feature_h), hi(roi.y_max, feature_h), lo(roi.x_min, feature_w),
                    hi(roi.x_max, feature_w)};
  if (!roi.valid() || w.y1 <= w.y0 || w.x1 <= w.x0) {
    throw DomainError("roi_pool: roi " + to_string(roi) + " does not cover any cell of the " +
                      std::to_string(feature_h) + "x" + std::to_string(feature_w) + " feature map");
  }
  return w;
}

template <typename T>
Tensor<T> roi_pool(const Tensor<T>& features, const BoundingBox& roi, std::size_t pool,
                   std::size_t feature_stride, Tape<T>* tape) {
  if (features.rank() != 3) {
    throw ShapeError("roi_pool: expected [C, H, W] features, got " + shape_str(features.shape()));
  }
  const ops::CellWindow w = roi_cells(roi, feature_stride, features.dim(1), features.dim(2));
  return ops::window_max_pool(features, w, pool, tape);
}

template <typename T>
std::vector<Detection> detect(const Detector<T>& detector, const Tensor<T>& image,
                              const DetectConfig& cfg) {
  cfg.validate();
  const DetectorSpec& spec = detector.spec();
  const double img_h = static_cast<double>(image.dim(1));
  const double img_w = static_cast<double>(image.dim(2));
  const Tensor<T> features = detector.backbone(image);
  const RpnOutput<T> rpn = detector.rpn(features);
  const auto anchors = generate_anchors(spec.anchors, features.dim(1), features.dim(2));
  const auto proposals = select_proposals<T>(rpn, anchors, img_w, img_h, cfg.proposals);

  const std::size_t k = spec.num_classes;
  std::vector<std::vector<BoundingBox>> boxes(k + 1);
  std::vector<std::vector<double>> scores(k + 1);
  for (const auto& p : proposals) {
    const HeadOutput<T> out =
        detector.head(roi_pool(features, p.box, spec.pool_size, spec.feature_stride()));
    const auto deltas = out.box_deltas.data();
    for (std::size_t c = 1; c <= k; ++c) {
      const double score = out.class_probs[c];
      if (score < cfg.score_threshold) continue;
      BoxDeltas d;
      for (std::size_t q = 0; q < 4; ++q) d[q] = static_cast<double>(deltas[4 * (c - 1) + q]);
      const BoundingBox box = decode_box(p.box, clamp_size_deltas(d), img_w, img_h);
      if (!(box.width() > 0.0 && box.height() > 0.0)) continue;
      boxes[c].push_back(box);
      scores[c].push_back(score);
    }
  }

  std::vector<Detection> dets;
  for (std::size_t c = 1; c <= k; ++c) {
    for (std::size_t i : nms(boxes[c], scores[c], cfg.nms_iou)) {
      dets.push_back({boxes[c][i], static_cast<int>(c), scores[c][i]});
    }
  }
  std::stable_sort(dets.begin(), dets.end(),
                   [](const Detection& a, const Detection& b) { return a.score > b.score; });
  if (dets.size() > cfg.max_detections) dets.resize(cfg.max_detections);
  return dets;
}

template class Detector<float>;
template class Detector<double>;

#define SRDET_INSTANTIATE_DETECTOR(T)                                                          \
  template std::vector<Proposal> select_proposals(const RpnOutput<T>&,                         \
                                                  std::span<const BoundingBox>, double, double, \
                                                  const ProposalConfig&);                      \
  template Tensor<T> roi_pool(const Tensor<T>&, const BoundingBox&, std::size_t, std::size_t,  \
                              Tape<T>*);                                                       \
  template std::vector<Detection> detect(const Detector<T>&, const Tensor<T>&,                 \
                                         const DetectConfig&);

SRDET_INSTANTIATE_DETECTOR(float)
SRDET_INSTANTIATE_DETECTOR(double)

#undef SRDET_INSTANTIATE_DETECTOR

}  // namespace srdet::det
