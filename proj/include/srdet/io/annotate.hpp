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
#include <cstddef>
#include <string>
#include <vector>

#include "srdet/core/tensor.hpp"
#include "srdet/det/box.hpp"

namespace srdet::io {

inline constexpr std::size_t kGlyphWidth = 3;
inline constexpr std::size_t kGlyphHeight = 5;
// Glyph width plus one column of spacing.
inline constexpr std::size_t kGlyphAdvance = 4;

// Row-major 3x5 bitmap; bit (2 - x) of row y is pixel (x, y). Characters
// without a glyph render blank. Letters are case-insensitive.
std::array<std::uint8_t, kGlyphHeight> glyph(char c);

struct AnnotateOptions {
  bool draw_labels = true;
};

// Label text, e.g. "disk 0.81"; class ids without a name become "cls<N>".
std::string detection_label(const det::Detection& d, const std::vector<std::string>& class_names);

// Width and height in pixels of the red strip holding `label`.
std::size_t label_strip_width(const std::string& label);
inline constexpr std::size_t kLabelStripHeight = kGlyphHeight + 2;

// Returns a copy of a [3, H, W] image with a pure red 1-pixel outline per
// detection and, above each box, a red strip with the label in white.
// Boxes are drawn lowest score first so the best detection ends up on top.
Tensor<float> annotate_image(const Tensor<float>& image, const std::vector<det::Detection>& dets,
                             const std::vector<std::string>& class_names,
                             const AnnotateOptions& options = {});

// Pixel rectangle [x0, x1] x [y0, y1] (inclusive) covered by a box outline,
// after clipping to the image. Empty when the box misses the image.
struct PixelRect {
  long x0 = 0, y0 = 0, x1 = -1, y1 = -1;
  bool empty() const { return x1 < x0 || y1 < y0; }
};
PixelRect outline_rect(const det::BoundingBox& box, std::size_t width, std::size_t height);
// Where the label strip of `box` lands.
PixelRect label_rect(const det::BoundingBox& box, const std::string& label, std::size_t width,
                     std::size_t height);

}  // namespace srdet::io
