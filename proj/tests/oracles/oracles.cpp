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

#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace srdet::oracle {

std::vector<double> conv2d(const std::vector<double>& input, std::size_t c, std::size_t h,
                           std::size_t w, const std::vector<double>& kernel, std::size_t o,
                           std::size_t k, const std::vector<double>& bias, std::size_t stride,
                           std::size_t padding, std::size_t* out_h, std::size_t* out_w) {
  const long ph = static_cast<long>(h + 2 * padding), pw = static_cast<long>(w + 2 * padding);
  const std::size_t oh = static_cast<std::size_t>((ph - static_cast<long>(k)) / static_cast<long>(stride) + 1);
  const std::size_t ow = static_cast<std::size_t>((pw - static_cast<long>(k)) / static_cast<long>(stride) + 1);
  std::vector<double> out(o * oh * ow, 0.0);
  for (std::size_t oc = 0; oc < o; ++oc) {
    for (std::size_t y = 0; y < oh; ++y) {
      for (std::size_t x = 0; x < ow; ++x) {
        double acc = bias[oc];
        for (std::size_t ic = 0; ic < c; ++ic) {
          for (std::size_t ky = 0; ky < k; ++ky) {
            for (std::size_t kx = 0; kx < k; ++kx) {
              const long iy = static_cast<long>(y * stride + ky) - static_cast<long>(padding);
              const long ix = static_cast<long>(x * stride + kx) - static_cast<long>(padding);
              if (iy < 0 || ix < 0 || iy >= static_cast<long>(h) || ix >= static_cast<long>(w)) {
                continue;
              }
              acc += input[(ic * h + static_cast<std::size_t>(iy)) * w + static_cast<std::size_t>(ix)] *
                     kernel[((oc * c + ic) * k + ky) * k + kx];
            }
          }
        }
        out[(oc * oh + y) * ow + x] = acc;
      }
    }
  }
  *out_h = oh;
  *out_w = ow;
  return out;
}

double iou(const Box& a, const Box& b) {
  const double iw = std::min(a.x1, b.x1) - std::max(a.x0, b.x0);
  const double ih = std::min(a.y1, b.y1) - std::max(a.y0, b.y0);
  const double inter = iw > 0 && ih > 0 ? iw * ih : 0.0;
  const double uni = (a.x1 - a.x0) * (a.y1 - a.y0) + (b.x1 - b.x0) * (b.y1 - b.y0) - inter;
  return uni > 0 ? inter / uni : 0.0;
}

double grid_iou(const Box& a, const Box& b, int subdiv) {
  auto cells = [&](double v) { return static_cast<long>(std::llround(v * subdiv)); };
  const long lo_x = std::min(cells(a.x0), cells(b.x0)), hi_x = std::max(cells(a.x1), cells(b.x1));
  const long lo_y = std::min(cells(a.y0), cells(b.y0)), hi_y = std::max(cells(a.y1), cells(b.y1));
  long in_a = 0, in_b = 0, both = 0;
  for (long y = lo_y; y < hi_y; ++y) {
    for (long x = lo_x; x < hi_x; ++x) {
      const bool ia = x >= cells(a.x0) && x < cells(a.x1) && y >= cells(a.y0) && y < cells(a.y1);
      const bool ib = x >= cells(b.x0) && x < cells(b.x1) && y >= cells(b.y0) && y < cells(b.y1);
      in_a += ia;
      in_b += ib;
      both += ia && ib;
    }
  }
  const long uni = in_a + in_b - both;
  return uni == 0 ? 0.0 : static_cast<double>(both) / static_cast<double>(uni);
}

std::vector<std::size_t> nms(const std::vector<Box>& boxes, const std::vector<double>& scores,
                             double threshold) {
  std::vector<std::size_t> order(boxes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Selection sort keeps the tie rule explicit.
  for (std::size_t i = 0; i < order.size(); ++i) {
    std::size_t best = i;
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      const std::size_t a = order[j], b = order[best];
      if (scores[a] > scores[b] || (scores[a] == scores[b] && a < b)) best = j;
    }
    std::swap(order[i], order[best]);
  }
  std::vector<std::size_t> kept;
  for (std::size_t i : order) {
    bool suppressed = false;
    for (std::size_t k : kept) suppressed = suppressed || iou(boxes[i], boxes[k]) > threshold;
    if (!suppressed) kept.push_back(i);
  }
  return kept;
}

std::vector<double> bin_max_pool(const std::vector<double>& features, std::size_t c,
                                 std::size_t h, std::size_t w, std::size_t y0, std::size_t y1,
                                 std::size_t x0, std::size_t x1, std::size_t pool) {
  const std::size_t lh = y1 - y0, lw = x1 - x0;
  std::vector<double> out(c * pool * pool, 0.0);
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t by = 0; by < pool; ++by) {
      const std::size_t ry0 = y0 + by * lh / pool, ry1 = y0 + ((by + 1) * lh + pool - 1) / pool;
      for (std::size_t bx = 0; bx < pool; ++bx) {
        const std::size_t rx0 = x0 + bx * lw / pool, rx1 = x0 + ((bx + 1) * lw + pool - 1) / pool;
        bool any = false;
        double m = 0.0;
        for (std::size_t y = ry0; y < ry1; ++y) {
          for (std::size_t x = rx0; x < rx1; ++x) {
            const double v = features[(ch * h + y) * w + x];
            if (!any || v > m) m = v;
            any = true;
          }
        }
        out[(ch * pool + by) * pool + bx] = any ? m : 0.0;
      }
    }
  }
  return out;
}

double ap_by_integration(const std::vector<Scored>& ranked, std::size_t num_gt) {
  if (num_gt == 0) return ranked.empty() ? 1.0 : 0.0;
  std::vector<double> p, r;
  std::size_t tp = 0;
  for (std::size_t k = 0; k < ranked.size(); ++k) {
    tp += ranked[k].tp;
    p.push_back(static_cast<double>(tp) / static_cast<double>(k + 1));
    r.push_back(static_cast<double>(tp) / static_cast<double>(num_gt));
  }
  auto envelope = [&](double level) {
    double best = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (r[k] >= level) best = std::max(best, p[k]);
    }
    return best;
  };
  std::vector<double> breaks = r;
  breaks.push_back(0.0);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  double area = 0.0;
  for (std::size_t i = 1; i < breaks.size(); ++i) {
    // p(r) is constant on (breaks[i-1], breaks[i]]; sample it at the midpoint.
    area += (breaks[i] - breaks[i - 1]) * envelope(0.5 * (breaks[i - 1] + breaks[i]));
  }
  return area;
}

std::vector<bool> greedy_flags(const std::vector<Det>& dets, const std::vector<Gt>& gts,
                               double threshold) {
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });
  std::vector<bool> used(gts.size(), false), flags(dets.size(), false);
  for (std::size_t d : order) {
    long best = -1;
    double best_iou = 0.0;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (used[g] || gts[g].cls != dets[d].cls) continue;
      const double v = iou(dets[d].box, gts[g].box);
      if (v >= threshold && (best < 0 || v > best_iou)) {
        best = static_cast<long>(g);
        best_iou = v;
      }
    }
    if (best >= 0) {
      used[static_cast<std::size_t>(best)] = true;
      flags[d] = true;
    }
  }
  return flags;
}

namespace {

std::size_t max_matching_from(const std::vector<Det>& dets, const std::vector<Gt>& gts,
                              double threshold, std::size_t d, std::vector<bool>& used) {
  if (d == dets.size()) return 0;
  std::size_t best = max_matching_from(dets, gts, threshold, d + 1, used);
  for (std::size_t g = 0; g < gts.size(); ++g) {
    if (used[g] || gts[g].cls != dets[d].cls || iou(dets[d].box, gts[g].box) < threshold) continue;
    used[g] = true;
    best = std::max(best, 1 + max_matching_from(dets, gts, threshold, d + 1, used));
    used[g] = false;
  }
  return best;
}

}  // namespace

std::size_t max_matching(const std::vector<Det>& dets, const std::vector<Gt>& gts,
                         double threshold) {
  std::vector<bool> used(gts.size(), false);
  return max_matching_from(dets, gts, threshold, 0, used);
}

std::vector<double> numeric_gradient(const std::function<double()>& f, std::span<double> x,
                                     double h) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + h;
    const double up = f();
    x[i] = keep - h;
    const double down = f();
    x[i] = keep;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

double relative_error(double analytic, double numeric, double floor) {
  return std::abs(analytic - numeric) /
         std::max({std::abs(analytic), std::abs(numeric), floor});
}

}  // namespace srdet::oracle
