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
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "srdet/core/errors.hpp"
#include "srdet/core/tensor.hpp"

namespace srdet::io {

enum class ParseErrorKind {
  kIo,
  kBadMagic,
  kBadHeader,
  kOverflow,
  kUnsupportedMaxval,
  kTruncated,
  kMalformed,
};

const char* to_string(ParseErrorKind kind);

class ParseError : public Error {
 public:
  ParseError(ParseErrorKind kind, std::size_t offset, const std::string& what);
  ParseErrorKind kind() const { return kind_; }
  // Byte offset into the input where the problem was detected.
  std::size_t offset() const { return offset_; }

 private:
  ParseErrorKind kind_;
  std::size_t offset_;
};

// Largest accepted width or height.
inline constexpr std::size_t kMaxImageExtent = 16384;

// Binary P6 (3 channels) or P5 (1 channel), maxval 255. Pixels become
// channel-first floats v / 255.
Tensor<float> decode_ppm(std::span<const std::uint8_t> bytes);
// Values must lie in [0, 1]; each is stored as round(v * 255).
std::vector<std::uint8_t> encode_ppm(const Tensor<float>& image);

Tensor<float> read_ppm(const std::filesystem::path& path);
void write_ppm(const Tensor<float>& image, const std::filesystem::path& path);

// File helpers shared by the io layer; failures raise ParseError(kIo).
std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path);
std::string read_text(const std::filesystem::path& path);
void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace srdet::io
