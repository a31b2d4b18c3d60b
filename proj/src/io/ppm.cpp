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

#include "srdet/io/ppm.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>

namespace srdet::io {
namespace {

bool is_space(std::uint8_t c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; }

constexpr std::size_t kMaxPpmMaxval = 65535;

class HeaderReader {
 public:
  explicit HeaderReader(std::span<const std::uint8_t> bytes) : b_(bytes) {}

  // Skips whitespace and '#' comments, then reads an unsigned decimal.
  std::size_t number(const char* field, std::size_t limit) {
    for (;;) {
      if (pos_ >= b_.size()) {
        throw ParseError(ParseErrorKind::kTruncated, pos_,
                         std::string("header ends before ") + field);
      }
      if (is_space(b_[pos_])) {
        ++pos_;
      } else if (b_[pos_] == '#') {
        while (pos_ < b_.size() && b_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
    if (b_[pos_] < '0' || b_[pos_] > '9') {
      throw ParseError(ParseErrorKind::kBadHeader, pos_,
                       std::string("expected a decimal ") + field);
    }
    const std::size_t start = pos_;
    std::size_t v = 0;
    while (pos_ < b_.size() && b_[pos_] >= '0' && b_[pos_] <= '9') {
      v = v * 10 + static_cast<std::size_t>(b_[pos_] - '0');
      if (v > limit) {
        throw ParseError(ParseErrorKind::kOverflow, start,
                         std::string(field) + " exceeds " + std::to_string(limit));
      }
      ++pos_;
    }
    return v;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  void single_space() {
    if (pos_ >= b_.size()) {
      throw ParseError(ParseErrorKind::kTruncated, pos_, "header ends before the raster");
    }
    if (!is_space(b_[pos_])) {
      throw ParseError(ParseErrorKind::kBadHeader, pos_, "expected whitespace after maxval");
    }
    ++pos_;
  }

  std::size_t pos() const { return pos_; }
  void skip(std::size_t n) { pos_ += n; }

 private:
  std::span<const std::uint8_t> b_;
  std::size_t pos_ = 0;
};

}  // namespace

const char* to_string(ParseErrorKind kind) {
  switch (kind) {
    case ParseErrorKind::kIo: return "io";
    case ParseErrorKind::kBadMagic: return "bad-magic";
    case ParseErrorKind::kBadHeader: return "bad-header";
    case ParseErrorKind::kOverflow: return "overflow";
    case ParseErrorKind::kUnsupportedMaxval: return "unsupported-maxval";
    case ParseErrorKind::kTruncated: return "truncated";
    case ParseErrorKind::kMalformed: return "malformed";
  }
  return "unknown";
}

ParseError::ParseError(ParseErrorKind kind, std::size_t offset, const std::string& what)
    : Error(std::string("parse error (") + to_string(kind) + ") at byte " +
            std::to_string(offset) + ": " + what),
      kind_(kind),
      offset_(offset) {}

Tensor<float> decode_ppm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2) throw ParseError(ParseErrorKind::kTruncated, bytes.size(), "missing magic");
  if (bytes[0] != 'P' || (bytes[1] != '6' && bytes[1] != '5')) {
    throw ParseError(ParseErrorKind::kBadMagic, 0, "expected P6 or P5");
  }
  const std::size_t channels = bytes[1] == '6' ? 3 : 1;
  HeaderReader r(bytes);
  r.skip(2);
  const std::size_t start_w = r.pos();
  const std::size_t width = r.number("width", kMaxImageExtent);
  const std::size_t height = r.number("height", kMaxImageExtent);
  if (width == 0 || height == 0) {
    throw ParseError(ParseErrorKind::kBadHeader, start_w, "zero image dimension");
  }
  const std::size_t maxval_pos = r.pos();
  const std::size_t maxval = r.number("maxval", kMaxPpmMaxval);
  if (maxval != 255) {
    throw ParseError(ParseErrorKind::kUnsupportedMaxval, maxval_pos,
                     "maxval " + std::to_string(maxval) + " (only 255 is supported)");
  }
  r.single_space();
  const std::size_t header = r.pos();
  const std::size_t pixels = width * height;
  const std::size_t payload = pixels * channels;
  if (bytes.size() - header < payload) {
    throw ParseError(ParseErrorKind::kTruncated, bytes.size(),
                     "raster needs " + std::to_string(payload) + " bytes, found " +
                         std::to_string(bytes.size() - header));
  }
  std::vector<float> data(payload);
  for (std::size_t p = 0; p < pixels; ++p) {
    for (std::size_t c = 0; c < channels; ++c) {
      data[c * pixels + p] = static_cast<float>(bytes[header + p * channels + c]) / 255.0f;
    }
  }
  return Tensor<float>({channels, height, width}, std::move(data));
}

std::vector<std::uint8_t> encode_ppm(const Tensor<float>& image) {
  if (image.rank() != 3 || (image.dim(0) != 3 && image.dim(0) != 1)) {
    throw ShapeError("encode_ppm: expected a [3, H, W] or [1, H, W] image, got " +
                     shape_str(image.shape()));
  }
  const std::size_t channels = image.dim(0), height = image.dim(1), width = image.dim(2);
  const std::size_t pixels = height * width;
  char header[64];
  const int n = std::snprintf(header, sizeof(header), "%s\n%zu %zu\n255\n",
                              channels == 3 ? "P6" : "P5", width, height);
  std::vector<std::uint8_t> out(header, header + n);
  out.resize(out.size() + pixels * channels);
  const auto d = image.data();
  std::uint8_t* raster = out.data() + n;
  for (std::size_t c = 0; c < channels; ++c) {
    for (std::size_t p = 0; p < pixels; ++p) {
      const float v = d[c * pixels + p];
      if (!(v >= 0.0f && v <= 1.0f)) {
        throw DomainError("encode_ppm: value " + std::to_string(v) + " at flat index " +
                              std::to_string(c * pixels + p) + " outside [0, 1]",
                          c * pixels + p);
      }
      raster[p * channels + c] = static_cast<std::uint8_t>(std::lround(static_cast<double>(v) * 255.0));
    }
  }
  return out;
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(ParseErrorKind::kIo, 0, "cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

std::string read_text(const std::filesystem::path& path) {
  const auto b = read_bytes(path);
  return std::string(b.begin(), b.end());
}

void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError(ParseErrorKind::kIo, 0, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ParseError(ParseErrorKind::kIo, 0, "write failed: " + path.string());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  write_bytes(path, std::span<const std::uint8_t>(
                        reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

Tensor<float> read_ppm(const std::filesystem::path& path) {
  return decode_ppm(read_bytes(path));
}

void write_ppm(const Tensor<float>& image, const std::filesystem::path& path) {
  write_bytes(path, encode_ppm(image));
}

}  // namespace srdet::io
