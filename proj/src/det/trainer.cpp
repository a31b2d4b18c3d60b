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

#include "srdet/det/trainer.hpp"

#include <algorithm>
#include <cmath>

#include "srdet/core/ops.hpp"
#include "srdet/train/batch_sampler.hpp"
#include "srdet/train/sr_trainer.hpp"

namespace srdet::det {
namespace {

std::vector<std::size_t> take_shuffled(std::vector<std::size_t> pool, std::size_t n, Rng& rng) {
  rng.shuffle(pool);
  if (pool.size() > n) pool.resize(n);
  std::sort(pool.begin(), pool.end());
  return pool;
}

bool in_unit(double v) { return v >= 0.0 && v <= 1.0; }

}  // namespace

void DetTrainingOptions::validate() const {
  if (batch_size == 0) throw ValidationError("detector training: batch_size must be positive");
  if (!in_unit(rpn_positive_iou) || !in_unit(rpn_negative_iou) ||
      rpn_negative_iou > rpn_positive_iou) {
    throw ValidationError("detector training: need 0 <= rpn_negative_iou <= rpn_positive_iou <= 1");
  }
  if (!in_unit(rpn_positive_fraction) || !in_unit(roi_foreground_fraction) ||
      !in_unit(roi_foreground_iou)) {
    throw ValidationError("detector training: fractions and IoU thresholds must be in [0, 1]");
  }
  if (rpn_batch == 0 || roi_batch == 0) {
    throw ValidationError("detector training: rpn_batch and roi_batch must be positive");
  }
  if (!(smooth_l1_beta > 0.0)) throw ValidationError("detector training: smooth_l1_beta must be positive");
  proposals.validate();
}

AnchorTargets label_anchors(std::span<const BoundingBox> anchors, std::span<const GroundTruth> gts,
                            double positive_iou, double negative_iou) {
  AnchorTargets t;
  t.labels.assign(anchors.size(), -1);
  t.matched_gt.assign(anchors.size(), 0);
  if (gts.empty()) {
    std::fill(t.labels.begin(), t.labels.end(), 0);
    return t;
  }
  std::vector<double> best_for_gt(gts.size(), 0.0);
  std::vector<double> overlaps(anchors.size() * gts.size());
  for (std::size_t n = 0; n < anchors.size(); ++n) {
    double best = -1.0;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      const double v = iou(anchors[n], gts[g].box);
      overlaps[n * gts.size() + g] = v;
      best_for_gt[g] = std::max(best_for_gt[g], v);
      if (v > best) {
        best = v;
        t.matched_gt[n] = g;
      }
    }
    if (best >= positive_iou) {
      t.labels[n] = 1;
    } else if (best <= negative_iou) {
      t.labels[n] = 0;
    }
  }
  for (std::size_t g = 0; g < gts.size(); ++g) {
    if (best_for_gt[g] <= 0.0) continue;
    for (std::size_t n = 0; n < anchors.size(); ++n) {
      if (overlaps[n * gts.size() + g] == best_for_gt[g]) {
        t.labels[n] = 1;
        t.matched_gt[n] = g;
      }
    }
  }
  return t;
}

DetLoss detector_loss(const Detector<float>& detector, const DetSample& sample,
                      const DetTrainingOptions& options, Rng& rng, Tape<float>* tape) {
  const DetectorSpec& spec = detector.spec();
  const auto& gts = sample.gts;
  const double img_h = static_cast<double>(sample.image.dim(1));
  const double img_w = static_cast<double>(sample.image.dim(2));
  const Tensor<float> features = detector.backbone(sample.image, tape);
  const RpnOutput<float> rpn = detector.rpn(features, tape);
  const std::size_t fh = features.dim(1), fw = features.dim(2);
  const std::size_t a_count = spec.anchors.per_location();
  const std::size_t plane = fh * fw;
  const auto anchors = generate_anchors(spec.anchors, fh, fw);

  DetLoss out;

  // RPN.
  const AnchorTargets targets =
      label_anchors(anchors, gts, options.rpn_positive_iou, options.rpn_negative_iou);
  std::vector<std::size_t> pos, neg;
  for (std::size_t n = 0; n < anchors.size(); ++n) {
    if (targets.labels[n] == 1) pos.push_back(n);
    if (targets.labels[n] == 0) neg.push_back(n);
  }
  const auto max_pos = static_cast<std::size_t>(
      std::floor(static_cast<double>(options.rpn_batch) * options.rpn_positive_fraction));
  pos = take_shuffled(std::move(pos), max_pos, rng);
  neg = take_shuffled(std::move(neg), options.rpn_batch - pos.size(), rng);
  std::vector<std::size_t> obj_index;
  std::vector<float> obj_target;
  for (std::size_t n : pos) {
    obj_index.push_back((n % a_count) * plane + n / a_count);
    obj_target.push_back(1.0f);
  }
  for (std::size_t n : neg) {
    obj_index.push_back((n % a_count) * plane + n / a_count);
    obj_target.push_back(0.0f);
  }
  const double sampled = static_cast<double>(std::max<std::size_t>(obj_index.size(), 1));
  Tensor<float> rpn_obj = Tensor<float>::scalar(0.0f);
  Tensor<float> rpn_box = Tensor<float>::scalar(0.0f);
  if (!obj_index.empty()) {
    const std::size_t n_obj = obj_target.size();
    rpn_obj = ops::bce_with_logits(
        ops::gather(rpn.objectness_logits, obj_index, tape),
        Tensor<float>({n_obj}, std::move(obj_target)), tape);
  }
  if (!pos.empty()) {
    std::vector<std::size_t> delta_index;
    std::vector<float> delta_target;
    for (std::size_t n : pos) {
      const std::size_t a = n % a_count, loc = n / a_count;
      const BoxDeltas t = encode_box(anchors[n], gts[targets.matched_gt[n]].box);
      for (std::size_t k = 0; k < 4; ++k) {
        delta_index.push_back((4 * a + k) * plane + loc);
        delta_target.push_back(static_cast<float>(t[k]));
      }
    }
    const std::size_t n_delta = delta_target.size();
    rpn_box = ops::scale(
        ops::smooth_l1(ops::gather(rpn.deltas, delta_index, tape),
                       Tensor<float>({n_delta}, std::move(delta_target)),
                       options.smooth_l1_beta, tape),
        1.0 / sampled, tape);
  }

  // Head.
  std::vector<BoundingBox> rois;
  for (const auto& p : select_proposals<float>(rpn, anchors, img_w, img_h, options.proposals)) {
    rois.push_back(p.box);
  }
  for (const auto& g : gts) rois.push_back(g.box);
  std::vector<std::size_t> fg, bg;
  std::vector<std::size_t> roi_gt(rois.size(), 0);
  for (std::size_t r = 0; r < rois.size(); ++r) {
    double best = 0.0;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      const double v = iou(rois[r], gts[g].box);
      if (v > best) {
        best = v;
        roi_gt[r] = g;
      }
    }
    (!gts.empty() && best >= options.roi_foreground_iou ? fg : bg).push_back(r);
  }
  const auto max_fg = static_cast<std::size_t>(
      std::round(static_cast<double>(options.roi_batch) * options.roi_foreground_fraction));
  fg = take_shuffled(std::move(fg), max_fg, rng);
  bg = take_shuffled(std::move(bg), options.roi_batch - fg.size(), rng);

  Tensor<float> head_cls = Tensor<float>::scalar(0.0f);
  Tensor<float> head_box = Tensor<float>::scalar(0.0f);
  const std::size_t n_rois = fg.size() + bg.size();
  if (n_rois > 0) {
    std::vector<Tensor<float>> ce, sl1;
    auto run = [&](std::size_t r, bool foreground) {
      const HeadOutput<float> h = detector.head(
          roi_pool(features, rois[r], spec.pool_size, spec.feature_stride(), tape), tape);
      const GroundTruth& g = gts.empty() ? GroundTruth{} : gts[roi_gt[r]];
      const std::size_t label = foreground ? static_cast<std::size_t>(g.class_id) : 0;
      ce.push_back(ops::cross_entropy(h.class_logits, label, tape));
      if (!foreground) return;
      const BoxDeltas t = encode_box(rois[r], g.box);
      std::vector<std::size_t> idx;
      for (std::size_t k = 0; k < 4; ++k) idx.push_back(4 * (label - 1) + k);
      sl1.push_back(ops::smooth_l1(ops::gather(h.box_deltas, idx, tape),
                                   Tensor<float>({4}, {static_cast<float>(t[0]),
                                                       static_cast<float>(t[1]),
                                                       static_cast<float>(t[2]),
                                                       static_cast<float>(t[3])}),
                                   options.smooth_l1_beta, tape));
    };
    for (std::size_t r : fg) run(r, true);
    for (std::size_t r : bg) run(r, false);
    const double inv = 1.0 / static_cast<double>(n_rois);
    head_cls = ops::scale(ops::sum(ops::concat(ce, tape), tape), inv, tape);
    if (!sl1.empty()) head_box = ops::scale(ops::sum(ops::concat(sl1, tape), tape), inv, tape);
  }

  out.parts.rpn_objectness = rpn_obj.item();
  out.parts.rpn_box = rpn_box.item();
  out.parts.head_class = head_cls.item();
  out.parts.head_box = head_box.item();
  out.total = ops::add(ops::add(rpn_obj, rpn_box, tape), ops::add(head_cls, head_box, tape), tape);
  out.parts.total = out.total.item();
  return out;
}

namespace {

std::vector<Tensor<float>> parameter_tensors(const Detector<float>& d) {
  std::vector<Tensor<float>> out;
  for (const auto& p : d.parameters()) out.push_back(p.tensor);
  return out;
}

}  // namespace

DetTrainer::DetTrainer(Detector<float>& detector, const DetTrainingOptions& options)
    : detector_(detector),
      options_(options),
      opt_(parameter_tensors(detector), options.adam),
      rng_(options.seed ^ 0x9e3779b97f4a7c15ULL) {
  options_.validate();
}

DetLossReport DetTrainer::train_step(std::span<const DetSample> batch) {
  if (batch.empty()) throw ValidationError("empty detector training batch");
  Tape<float> tape;
  std::vector<Tensor<float>> losses;
  DetLossReport report;
  report.step = step_;
  for (const auto& sample : batch) {
    DetLoss l = detector_loss(detector_, sample, options_, rng_, &tape);
    losses.push_back(l.total);
    report.rpn_objectness += l.parts.rpn_objectness;
    report.rpn_box += l.parts.rpn_box;
    report.head_class += l.parts.head_class;
    report.head_box += l.parts.head_box;
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  const Tensor<float> loss = ops::scale(ops::sum(ops::concat(losses, &tape), &tape), inv, &tape);
  train::require_finite(loss, tape, "detector loss");
  opt_.zero_grad();
  backward(loss, tape);
  opt_.step();
  report.rpn_objectness *= inv;
  report.rpn_box *= inv;
  report.head_class *= inv;
  report.head_box *= inv;
  report.total = loss.item();
  ++step_;
  return report;
}

std::vector<DetLossReport> train_detector(Detector<float>& detector,
                                          std::span<const DetSample> data,
                                          const DetTrainingOptions& options,
                                          const std::function<void(const DetLossReport&)>& on_step) {
  options.validate();
  if (data.empty()) throw ValidationError("train_detector: no training samples");
  DetTrainer trainer(detector, options);
  train::BatchSampler sampler(data.size(), options.batch_size, options.seed);
  std::vector<DetSample> batch;
  std::vector<DetLossReport> history;
  history.reserve(options.steps);
  for (std::size_t s = 0; s < options.steps; ++s) {
    batch.clear();
    for (std::size_t i : sampler.next()) batch.push_back(data[i]);
    history.push_back(trainer.train_step(batch));
    if (on_step) on_step(history.back());
  }
  return history;
}

}  // namespace srdet::det
