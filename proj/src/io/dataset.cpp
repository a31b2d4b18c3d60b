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

#include "srdet/io/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>

#include "srdet/io/annotations.hpp"
#include "srdet/io/ppm.hpp"

namespace srdet::io {
namespace {

struct Mask {
  std::size_t size;
  std::vector<std::uint8_t> on;
  bool at(std::size_t y, std::size_t x) const { return on[y * size + x] != 0; }
};

// Rasterizes one shape whose bounding square starts at (x0, y0). Pixel
// (x, y) is covered when its center lies inside the shape.
Mask rasterize(int cls, double x0, double y0, double w, double h, std::size_t size) {
  Mask m{size, std::vector<std::uint8_t>(size * size, 0)};
  for (std::size_t y = 0; y < size; ++y) {
    for (std::size_t x = 0; x < size; ++x) {
      const double px = static_cast<double>(x) + 0.5;
      const double py = static_cast<double>(y) + 0.5;
      bool inside = false;
      if (cls == kRectangle) {
        inside = px >= x0 && px < x0 + w && py >= y0 && py < y0 + h;
      } else if (cls == kDisk) {
        const double r = 0.5 * w;
        const double dx = px - (x0 + r), dy = py - (y0 + r);
        inside = dx * dx + dy * dy <= r * r;
      } else {
        // Apex at the top middle, base along the bottom edge.
        if (py >= y0 && py <= y0 + h) {
          const double half = 0.5 * w * (py - y0) / h;
          const double cx = x0 + 0.5 * w;
          inside = px >= cx - half && px <= cx + half;
        }
      }
      if (inside) m.on[y * size + x] = 1;
    }
  }
  return m;
}

std::optional<det::BoundingBox> extent(const Mask& m) {
  std::size_t x_lo = m.size, y_lo = m.size, x_hi = 0, y_hi = 0;
  bool any = false;
  for (std::size_t y = 0; y < m.size; ++y) {
    for (std::size_t x = 0; x < m.size; ++x) {
      if (!m.at(y, x)) continue;
      any = true;
      x_lo = std::min(x_lo, x);
      y_lo = std::min(y_lo, y);
      x_hi = std::max(x_hi, x);
      y_hi = std::max(y_hi, y);
    }
  }
  if (!any) return std::nullopt;
  return det::BoundingBox{static_cast<double>(x_lo), static_cast<double>(y_lo),
                          static_cast<double>(x_hi + 1), static_cast<double>(y_hi + 1)};
}

// Boxes closer than one pixel count as overlapping.
bool touches(const det::BoundingBox& a, const det::BoundingBox& b) {
  return a.x_min < b.x_max + 1.0 && b.x_min < a.x_max + 1.0 && a.y_min < b.y_max + 1.0 &&
         b.y_min < a.y_max + 1.0;
}

// Snap to the 8-bit grid so in-memory samples equal their PPM round trip.
Tensor<float> quantized(Tensor<float> image) {
  for (float& v : image.mutable_data()) {
    v = static_cast<float>(std::lround(static_cast<double>(v) * 255.0)) / 255.0f;
  }
  return image;
}

std::string numbered(std::size_t i, const char* ext) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04zu%s", i, ext);
  return buf;
}

}  // namespace

std::vector<std::string> default_class_names() { return {"rect", "disk", "triangle"}; }

void SyntheticOptions::validate() const {
  if (hr_size == 0 || scale == 0) throw ValidationError("dataset: hr_size and scale must be positive");
  if (hr_size % scale != 0) {
    throw ValidationError("dataset: hr_size " + std::to_string(hr_size) +
                          " is not divisible by scale " + std::to_string(scale));
  }
  if (min_objects == 0 || min_objects > max_objects) {
    throw ValidationError("dataset: need 1 <= min_objects <= max_objects");
  }
  if (min_extent < 2 || min_extent > max_extent || max_extent > hr_size) {
    throw ValidationError("dataset: need 2 <= min_extent <= max_extent <= hr_size");
  }
}

Tensor<float> box_downsample(const Tensor<float>& image, std::size_t scale) {
  if (image.rank() != 3) throw ShapeError("box_downsample: expected [C, H, W], got " + shape_str(image.shape()));
  const std::size_t c = image.dim(0), h = image.dim(1), w = image.dim(2);
  if (scale == 0 || h % scale != 0 || w % scale != 0) {
    throw ValidationError("box_downsample: " + std::to_string(h) + "x" + std::to_string(w) +
                          " is not divisible by " + std::to_string(scale));
  }
  const std::size_t oh = h / scale, ow = w / scale;
  const auto in = image.data();
  std::vector<float> out(c * oh * ow);
  const double inv = 1.0 / static_cast<double>(scale * scale);
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t y = 0; y < oh; ++y) {
      for (std::size_t x = 0; x < ow; ++x) {
        double acc = 0.0;
        for (std::size_t dy = 0; dy < scale; ++dy) {
          for (std::size_t dx = 0; dx < scale; ++dx) {
            acc += in[(ch * h + y * scale + dy) * w + x * scale + dx];
          }
        }
        out[(ch * oh + y) * ow + x] = static_cast<float>(acc * inv);
      }
    }
  }
  return Tensor<float>({c, oh, ow}, std::move(out));
}

Tensor<float> nearest_upsample(const Tensor<float>& image, std::size_t scale) {
  if (image.rank() != 3 || scale == 0) {
    throw ShapeError("nearest_upsample: expected [C, H, W] and a positive scale");
  }
  const std::size_t c = image.dim(0), h = image.dim(1), w = image.dim(2);
  const std::size_t oh = h * scale, ow = w * scale;
  const auto in = image.data();
  std::vector<float> out(c * oh * ow);
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t y = 0; y < oh; ++y) {
      for (std::size_t x = 0; x < ow; ++x) {
        out[(ch * oh + y) * ow + x] = in[(ch * h + y / scale) * w + x / scale];
      }
    }
  }
  return Tensor<float>({c, oh, ow}, std::move(out));
}

Sample render_synthetic_sample(const SyntheticOptions& options, Rng& rng) {
  options.validate();
  const std::size_t n = options.hr_size;
  const double size = static_cast<double>(n);

  // Background: base colour, a linear ramp, stripes and pixel noise.
  std::vector<float> img(3 * n * n);
  double base[3];
  for (double& b : base) b = rng.uniform(0.05, 0.40);
  const double angle = rng.uniform(0.0, 2.0 * M_PI);
  const double ramp = rng.uniform(0.0, 0.15);
  const double freq = rng.uniform(0.3, 1.2);
  const double phase = rng.uniform(0.0, 2.0 * M_PI);
  const double stripe_angle = rng.uniform(0.0, M_PI);
  for (std::size_t y = 0; y < n; ++y) {
    for (std::size_t x = 0; x < n; ++x) {
      const double u = (static_cast<double>(x) / size - 0.5) * std::cos(angle) +
                       (static_cast<double>(y) / size - 0.5) * std::sin(angle);
      const double s = 0.05 * std::sin(freq * (static_cast<double>(x) * std::cos(stripe_angle) +
                                              static_cast<double>(y) * std::sin(stripe_angle)) +
                                      phase);
      for (std::size_t c = 0; c < 3; ++c) {
        const double v = base[c] + ramp * u + s + rng.uniform(-0.03, 0.03);
        img[(c * n + y) * n + x] = static_cast<float>(std::clamp(v, 0.0, 1.0));
      }
    }
  }

  Sample sample;
  const std::size_t count = static_cast<std::size_t>(
      rng.uniform_int(static_cast<int>(options.min_objects), static_cast<int>(options.max_objects)));
  const int lo = static_cast<int>(options.min_extent), hi = static_cast<int>(options.max_extent);
  for (std::size_t k = 0; k < count; ++k) {
    const int cls = rng.uniform_int(kRectangle, kTriangle);
    bool placed = false;
    for (int attempt = 0; attempt < kMaxPlacementAttempts && !placed; ++attempt) {
      const int w = rng.uniform_int(lo, hi);
      const int h = cls == kDisk ? w : rng.uniform_int(lo, hi);
      const int x0 = rng.uniform_int(0, static_cast<int>(n) - w);
      const int y0 = rng.uniform_int(0, static_cast<int>(n) - h);
      const Mask mask = rasterize(cls, x0, y0, w, h, n);
      const auto box = extent(mask);
      if (!box) continue;
      if (std::any_of(sample.gts.begin(), sample.gts.end(),
                      [&](const det::GroundTruth& g) { return touches(g.box, *box); })) {
        continue;
      }
      double colour[3];
      for (double& c : colour) c = rng.uniform(0.60, 1.00);
      for (std::size_t y = 0; y < n; ++y) {
        for (std::size_t x = 0; x < n; ++x) {
          if (!mask.at(y, x)) continue;
          for (std::size_t c = 0; c < 3; ++c) img[(c * n + y) * n + x] = static_cast<float>(colour[c]);
        }
      }
      sample.gts.push_back({cls, *box});
      placed = true;
    }
    if (!placed) {
      throw DatasetError("could not place shape " + std::to_string(k + 1) + " of " +
                         std::to_string(count) + " after " +
                         std::to_string(kMaxPlacementAttempts) + " attempts");
    }
  }
  sample.hr = quantized(Tensor<float>({3, n, n}, std::move(img)));
  sample.lr = quantized(box_downsample(sample.hr, options.scale));
  return sample;
}

std::vector<Sample> make_synthetic_samples(const SyntheticOptions& options) {
  options.validate();
  Rng rng(options.seed);
  std::vector<Sample> out;
  out.reserve(options.count);
  for (std::size_t i = 0; i < options.count; ++i) out.push_back(render_synthetic_sample(options, rng));
  return out;
}

std::vector<SampleRecord> make_synthetic_dataset(const SyntheticOptions& options,
                                                 const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  options.validate();
  for (const char* sub : {"hr", "lr", "ann"}) fs::create_directories(out_dir / sub);
  Rng rng(options.seed);
  std::vector<SampleRecord> records;
  for (std::size_t i = 0; i < options.count; ++i) {
    const Sample s = render_synthetic_sample(options, rng);
    SampleRecord r{fs::path("hr") / numbered(i, ".ppm"), fs::path("lr") / numbered(i, ".ppm"),
                   fs::path("ann") / numbered(i, ".txt")};
    write_ppm(s.hr, out_dir / r.hr);
    write_ppm(s.lr, out_dir / r.lr);
    write_annotations(s.gts, out_dir / r.annotations);
    records.push_back(r);
  }
  write_text(out_dir / "manifest.tsv", format_manifest(records));
  return records;
}

std::string format_manifest(const std::vector<SampleRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += r.hr.generic_string() + "\t" + r.lr.generic_string() + "\t" +
           r.annotations.generic_string() + "\n";
  }
  return out;
}

std::vector<SampleRecord> read_manifest(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  const std::filesystem::path base = path.parent_path();
  auto resolve = [&](const std::string& p) {
    const std::filesystem::path q(p);
    return q.is_absolute() ? q : base / q;
  };
  std::vector<SampleRecord> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty() && line[0] != '#') {
      const std::size_t t1 = line.find('\t');
      const std::size_t t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
      if (t2 == std::string::npos || line.find('\t', t2 + 1) != std::string::npos) {
        throw ParseError(ParseErrorKind::kMalformed, pos,
                         "manifest line needs three tab-separated paths");
      }
      out.push_back({resolve(line.substr(0, t1)), resolve(line.substr(t1 + 1, t2 - t1 - 1)),
                     resolve(line.substr(t2 + 1))});
    }
    pos = end + 1;
  }
  return out;
}

Sample load_sample(const SampleRecord& record, std::size_t scale) {
  Sample s{read_ppm(record.hr), read_ppm(record.lr), read_annotations(record.annotations)};
  if (scale == 0 || s.hr.dim(0) != s.lr.dim(0) || s.hr.dim(1) != s.lr.dim(1) * scale ||
      s.hr.dim(2) != s.lr.dim(2) * scale) {
    throw DatasetError("sample " + record.hr.string() + ": lr " + shape_str(s.lr.shape()) +
                       " is not hr " + shape_str(s.hr.shape()) + " / " + std::to_string(scale));
  }
  return s;
}

std::vector<Sample> load_dataset(const std::filesystem::path& manifest, std::size_t scale) {
  std::vector<Sample> out;
  for (const auto& r : read_manifest(manifest)) out.push_back(load_sample(r, scale));
  return out;
}

Split split_indices(std::size_t n, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction >= 0.0 && test_fraction <= 1.0)) {
    throw ValidationError("split: test_fraction must be in [0, 1]");
  }
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);
  const auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(n) * test_fraction));
  Split s;
  s.train.assign(order.begin(), order.end() - static_cast<std::ptrdiff_t>(n_test));
  s.test.assign(order.end() - static_cast<std::ptrdiff_t>(n_test), order.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

}  // namespace srdet::io
