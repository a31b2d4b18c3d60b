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

#include "srdet/io/annotate.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "srdet/core/errors.hpp"

namespace srdet::io {
namespace {

struct GlyphRows {
  char c;
  const char* rows[kGlyphHeight];
};

// clang-format off
constexpr GlyphRows kFont[] = {
    {'0', {"###", "#.#", "#.#", "#.#", "###"}}, {'1', {".#.", "##.", ".#.", ".#.", "###"}},
    {'2', {"###", "..#", "###", "#..", "###"}}, {'3', {"###", "..#", ".##", "..#", "###"}},
    {'4', {"#.#", "#.#", "###", "..#", "..#"}}, {'5', {"###", "#..", "###", "..#", "###"}},
    {'6', {"###", "#..", "###", "#.#", "###"}}, {'7', {"###", "..#", ".#.", ".#.", ".#."}},
    {'8', {"###", "#.#", "###", "#.#", "###"}}, {'9', {"###", "#.#", "###", "..#", "###"}},
    {'.', {"...", "...", "...", "...", ".#."}}, {'-', {"...", "...", "###", "...", "..."}},
    {'_', {"...", "...", "...", "...", "###"}}, {'<', {"..#", ".#.", "#..", ".#.", "..#"}},
    {'>', {"#..", ".#.", "..#", ".#.", "#.."}},
    {'a', {".#.", "#.#", "###", "#.#", "#.#"}}, {'b', {"##.", "#.#", "##.", "#.#", "##."}},
    {'c', {".##", "#..", "#..", "#..", ".##"}}, {'d', {"##.", "#.#", "#.#", "#.#", "##."}},
    {'e', {"###", "#..", "##.", "#..", "###"}}, {'f', {"###", "#..", "##.", "#..", "#.."}},
    {'g', {".##", "#..", "#.#", "#.#", ".##"}}, {'h', {"#.#", "#.#", "###", "#.#", "#.#"}},
    {'i', {"###", ".#.", ".#.", ".#.", "###"}}, {'j', {"..#", "..#", "..#", "#.#", ".#."}},
    {'k', {"#.#", "#.#", "##.", "#.#", "#.#"}}, {'l', {"#..", "#..", "#..", "#..", "###"}},
    {'m', {"#.#", "###", "###", "#.#", "#.#"}}, {'n', {"##.", "#.#", "#.#", "#.#", "#.#"}},
    {'o', {".#.", "#.#", "#.#", "#.#", ".#."}}, {'p', {"##.", "#.#", "##.", "#..", "#.."}},
    {'q', {".#.", "#.#", "#.#", "##.", ".##"}}, {'r', {"##.", "#.#", "##.", "#.#", "#.#"}},
    {'s', {".##", "#..", ".#.", "..#", "##."}}, {'t', {"###", ".#.", ".#.", ".#.", ".#."}},
    {'u', {"#.#", "#.#", "#.#", "#.#", "###"}}, {'v', {"#.#", "#.#", "#.#", "#.#", ".#."}},
    {'w', {"#.#", "#.#", "###", "###", "#.#"}}, {'x', {"#.#", "#.#", ".#.", "#.#", "#.#"}},
    {'y', {"#.#", "#.#", ".#.", ".#.", ".#."}}, {'z', {"###", "..#", ".#.", "#..", "###"}},
};
// clang-format on

void set_pixel(std::vector<float>& img, std::size_t w, std::size_t h, long x, long y, float r,
               float g, float b) {
  if (x < 0 || y < 0 || x >= static_cast<long>(w) || y >= static_cast<long>(h)) return;
  const std::size_t p = static_cast<std::size_t>(y) * w + static_cast<std::size_t>(x);
  img[p] = r;
  img[w * h + p] = g;
  img[2 * w * h + p] = b;
}

}  // namespace

std::array<std::uint8_t, kGlyphHeight> glyph(char c) {
  const char lc = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  std::array<std::uint8_t, kGlyphHeight> out{};
  for (const auto& g : kFont) {
    if (g.c != lc) continue;
    for (std::size_t y = 0; y < kGlyphHeight; ++y) {
      for (std::size_t x = 0; x < kGlyphWidth; ++x) {
        if (g.rows[y][x] == '#') out[y] |= static_cast<std::uint8_t>(1u << (kGlyphWidth - 1 - x));
      }
    }
    break;
  }
  return out;
}

std::string detection_label(const det::Detection& d, const std::vector<std::string>& class_names) {
  std::string name;
  if (d.class_id >= 1 && static_cast<std::size_t>(d.class_id) <= class_names.size()) {
    name = class_names[static_cast<std::size_t>(d.class_id) - 1];
  } else {
    name = "cls" + std::to_string(d.class_id);
  }
  char score[16];
  std::snprintf(score, sizeof(score), "%.2f", d.score);
  return name + " " + score;
}

std::size_t label_strip_width(const std::string& label) {
  return 1 + kGlyphAdvance * label.size();
}

PixelRect outline_rect(const det::BoundingBox& box, std::size_t width, std::size_t height) {
  PixelRect r;
  if (width == 0 || height == 0 || !box.valid()) return r;
  const double w = static_cast<double>(width), h = static_cast<double>(height);
  if (box.x_max < 0.0 || box.y_max < 0.0 || box.x_min >= w || box.y_min >= h) return r;
  const double x0 = std::floor(std::clamp(box.x_min, 0.0, w - 1.0));
  const double y0 = std::floor(std::clamp(box.y_min, 0.0, h - 1.0));
  const double x1 = std::clamp(std::ceil(box.x_max) - 1.0, x0, w - 1.0);
  const double y1 = std::clamp(std::ceil(box.y_max) - 1.0, y0, h - 1.0);
  return {static_cast<long>(x0), static_cast<long>(y0), static_cast<long>(x1),
          static_cast<long>(y1)};
}

PixelRect label_rect(const det::BoundingBox& box, const std::string& label, std::size_t width,
                     std::size_t height) {
  const PixelRect o = outline_rect(box, width, height);
  if (o.empty()) return {};
  const long w = static_cast<long>(label_strip_width(label));
  const long h = static_cast<long>(kLabelStripHeight);
  const long img_w = static_cast<long>(width), img_h = static_cast<long>(height);
  long x0 = std::max(0L, std::min(o.x0, img_w - w));
  long y0 = std::max(0L, o.y0 - h);
  return {x0, y0, std::min(img_w - 1, x0 + w - 1), std::min(img_h - 1, y0 + h - 1)};
}

Tensor<float> annotate_image(const Tensor<float>& image, const std::vector<det::Detection>& dets,
                             const std::vector<std::string>& class_names,
                             const AnnotateOptions& options) {
  if (image.rank() != 3 || image.dim(0) != 3) {
    throw ShapeError("annotate_image: expected a [3, H, W] image, got " + shape_str(image.shape()));
  }
  const std::size_t h = image.dim(1), w = image.dim(2);
  std::vector<float> px(image.data().begin(), image.data().end());

  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Ascending score; among equal scores the earlier detection is drawn last.
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return dets[a].score > dets[b].score; });
  std::reverse(order.begin(), order.end());

  for (std::size_t i : order) {
    const det::Detection& d = dets[i];
    const PixelRect o = outline_rect(d.box, w, h);
    if (o.empty()) continue;
    for (long x = o.x0; x <= o.x1; ++x) {
      set_pixel(px, w, h, x, o.y0, 1.0f, 0.0f, 0.0f);
      set_pixel(px, w, h, x, o.y1, 1.0f, 0.0f, 0.0f);
    }
    for (long y = o.y0; y <= o.y1; ++y) {
      set_pixel(px, w, h, o.x0, y, 1.0f, 0.0f, 0.0f);
      set_pixel(px, w, h, o.x1, y, 1.0f, 0.0f, 0.0f);
    }
    if (!options.draw_labels) continue;
    const std::string label = detection_label(d, class_names);
    const PixelRect l = label_rect(d.box, label, w, h);
    for (long y = l.y0; y <= l.y1; ++y) {
      for (long x = l.x0; x <= l.x1; ++x) set_pixel(px, w, h, x, y, 1.0f, 0.0f, 0.0f);
    }
    for (std::size_t k = 0; k < label.size(); ++k) {
      const auto rows = glyph(label[k]);
      const long gx = l.x0 + 1 + static_cast<long>(k * kGlyphAdvance);
      for (std::size_t gy = 0; gy < kGlyphHeight; ++gy) {
        for (std::size_t bx = 0; bx < kGlyphWidth; ++bx) {
          if (!(rows[gy] >> (kGlyphWidth - 1 - bx) & 1u)) continue;
          const long x = gx + static_cast<long>(bx);
          const long y = l.y0 + 1 + static_cast<long>(gy);
          // Glyph pixels outside the clipped strip are dropped.
          if (x > l.x1 || y > l.y1) continue;
          set_pixel(px, w, h, x, y, 1.0f, 1.0f, 1.0f);
        }
      }
    }
  }
  return Tensor<float>({3, h, w}, std::move(px));
}

}  // namespace srdet::io
