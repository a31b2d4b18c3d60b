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

#include "srdet/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "srdet/core/errors.hpp"

namespace srdet::eval {

MatchResult& MatchResult::operator+=(const MatchResult& other) {
  tp += other.tp;
  fp += other.fp;
  fn += other.fn;
  return *this;
}

MatchResult match_detections(std::span<const Detection> dets, std::span<const GroundTruth> gts,
                             double iou_threshold) {
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0)) {
    throw ValidationError("match_detections: iou_threshold must be in (0, 1]");
  }
  std::vector<double> scores;
  scores.reserve(dets.size());
  for (const auto& d : dets) scores.push_back(d.score);
  std::vector<bool> taken(gts.size(), false);
  MatchResult m;
  for (std::size_t di : det::score_order(scores)) {
    double best = -1.0;
    std::size_t best_gt = 0;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (taken[g] || gts[g].class_id != dets[di].class_id) continue;
      const double v = det::iou(dets[di].box, gts[g].box);
      if (v >= iou_threshold && v > best) {
        best = v;
        best_gt = g;
      }
    }
    if (best >= 0.0) {
      taken[best_gt] = true;
      m.pairs.push_back({di, best_gt, best});
    }
  }
  m.tp = m.pairs.size();
  m.fp = dets.size() - m.tp;
  m.fn = gts.size() - m.tp;
  return m;
}

std::vector<bool> true_positive_flags(const MatchResult& m, std::size_t num_detections) {
  std::vector<bool> flags(num_detections, false);
  for (const auto& p : m.pairs) flags[p.detection] = true;
  return flags;
}

Prf prf_metrics(const MatchResult& m) {
  const double tp = static_cast<double>(m.tp);
  const double fp = static_cast<double>(m.fp);
  const double fn = static_cast<double>(m.fn);
  Prf out;
  out.precision = m.tp + m.fp == 0 ? 0.0 : tp / (tp + fp);
  out.recall = m.tp + m.fn == 0 ? 0.0 : tp / (tp + fn);
  out.accuracy = m.tp + m.fp + m.fn == 0 ? 1.0 : tp / (tp + fp + fn);
  return out;
}

double average_precision(std::span<const ImageResult> images, double iou_threshold) {
  struct Ranked {
    double score;
    bool tp;
  };
  std::vector<Ranked> ranked;
  std::size_t total_gts = 0;
  for (const auto& img : images) {
    const MatchResult m = match_detections(img.detections, img.ground_truths, iou_threshold);
    const auto flags = true_positive_flags(m, img.detections.size());
    for (std::size_t i = 0; i < img.detections.size(); ++i) {
      ranked.push_back({img.detections[i].score, flags[i]});
    }
    total_gts += img.ground_truths.size();
  }
  if (total_gts == 0) return ranked.empty() ? 1.0 : 0.0;
  if (ranked.empty()) return 0.0;
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const Ranked& a, const Ranked& b) { return a.score > b.score; });

  std::vector<double> precision(ranked.size()), recall(ranked.size());
  std::size_t tp = 0;
  for (std::size_t k = 0; k < ranked.size(); ++k) {
    if (ranked[k].tp) ++tp;
    precision[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
    recall[k] = static_cast<double>(tp) / static_cast<double>(total_gts);
  }
  for (std::size_t k = ranked.size() - 1; k > 0; --k) {
    precision[k - 1] = std::max(precision[k - 1], precision[k]);
  }
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t k = 0; k < ranked.size(); ++k) {
    ap += (recall[k] - prev_recall) * precision[k];
    prev_recall = recall[k];
  }
  return ap;
}

double average_precision(std::span<const Detection> dets, std::span<const GroundTruth> gts,
                         double iou_threshold) {
  const ImageResult img{{dets.begin(), dets.end()}, {gts.begin(), gts.end()}};
  return average_precision(std::span<const ImageResult>(&img, 1), iou_threshold);
}

std::string Psnr::str() const {
  if (infinite) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", db);
  return buf;
}

Psnr psnr(const Tensor<float>& a, const Tensor<float>& b, double peak) {
  if (a.shape() != b.shape()) {
    throw ShapeError("psnr: shapes differ " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
  if (!(peak > 0.0)) throw DomainError("psnr: peak must be positive");
  const auto x = a.data();
  const auto y = b.data();
  double se = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = static_cast<double>(x[i]) - static_cast<double>(y[i]);
    se += d * d;
  }
  if (se == 0.0) return {0.0, true};
  const double mse = se / static_cast<double>(x.size());
  return {10.0 * std::log10(peak * peak / mse), false};
}

}  // namespace srdet::eval
