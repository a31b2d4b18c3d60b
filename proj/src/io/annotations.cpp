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

#include "srdet/io/annotations.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "srdet/io/ppm.hpp"

namespace srdet::io {
namespace {

// Calls fn(fields, line_offset) for every non-blank, non-comment line.
template <typename Fn>
void for_each_record(std::string_view text, Fn fn) {
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    const std::size_t hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    std::istringstream in{std::string(line)};
    std::vector<std::string> fields;
    for (std::string f; in >> f;) fields.push_back(f);
    if (!fields.empty()) fn(fields, pos);
    pos = end + 1;
  }
}

double to_real(const std::string& s, std::size_t offset) {
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size() || !std::isfinite(v)) {
    throw ParseError(ParseErrorKind::kMalformed, offset, "bad number '" + s + "'");
  }
  return v;
}

int to_class(const std::string& s, std::size_t offset) {
  const double v = to_real(s, offset);
  if (v < 0.0 || v != std::floor(v) || v > 1e6) {
    throw ParseError(ParseErrorKind::kMalformed, offset, "bad class id '" + s + "'");
  }
  return static_cast<int>(v);
}

det::BoundingBox to_box(const std::vector<std::string>& f, std::size_t first, std::size_t offset) {
  det::BoundingBox b{to_real(f[first], offset), to_real(f[first + 1], offset),
                     to_real(f[first + 2], offset), to_real(f[first + 3], offset)};
  if (!b.valid()) throw ParseError(ParseErrorKind::kMalformed, offset, "box with min > max");
  return b;
}

std::string fmt_coord(double v) {
  char buf[48];
  if (v == std::floor(v) && std::fabs(v) < 1e9) {
    std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(v));
  } else {
    std::snprintf(buf, sizeof(buf), "%.6f", v);
  }
  return buf;
}

}  // namespace

std::vector<det::GroundTruth> parse_annotations(std::string_view text) {
  std::vector<det::GroundTruth> out;
  for_each_record(text, [&](const std::vector<std::string>& f, std::size_t offset) {
    if (f.size() != 5) {
      throw ParseError(ParseErrorKind::kMalformed, offset,
                       "annotation needs 5 fields, found " + std::to_string(f.size()));
    }
    out.push_back({to_class(f[0], offset), to_box(f, 1, offset)});
  });
  return out;
}

std::string format_annotations(const std::vector<det::GroundTruth>& gts) {
  std::string out;
  for (const auto& g : gts) {
    out += std::to_string(g.class_id) + " " + fmt_coord(g.box.x_min) + " " +
           fmt_coord(g.box.y_min) + " " + fmt_coord(g.box.x_max) + " " + fmt_coord(g.box.y_max) +
           "\n";
  }
  return out;
}

std::vector<det::GroundTruth> read_annotations(const std::filesystem::path& path) {
  return parse_annotations(read_text(path));
}

void write_annotations(const std::vector<det::GroundTruth>& gts, const std::filesystem::path& path) {
  write_text(path, format_annotations(gts));
}

std::vector<det::Detection> parse_detections(std::string_view text) {
  std::vector<det::Detection> out;
  for_each_record(text, [&](const std::vector<std::string>& f, std::size_t offset) {
    if (f.size() != 6) {
      throw ParseError(ParseErrorKind::kMalformed, offset,
                       "detection needs 6 fields, found " + std::to_string(f.size()));
    }
    const double score = to_real(f[1], offset);
    if (score < 0.0 || score > 1.0) {
      throw ParseError(ParseErrorKind::kMalformed, offset, "score outside [0, 1]");
    }
    out.push_back({to_box(f, 2, offset), to_class(f[0], offset), score});
  });
  return out;
}

std::string format_detections(const std::vector<det::Detection>& dets) {
  std::string out;
  char buf[160];
  for (const auto& d : dets) {
    std::snprintf(buf, sizeof(buf), "%d %.6f %.6f %.6f %.6f %.6f\n", d.class_id, d.score,
                  d.box.x_min, d.box.y_min, d.box.x_max, d.box.y_max);
    out += buf;
  }
  return out;
}

std::vector<det::Detection> read_detections(const std::filesystem::path& path) {
  return parse_detections(read_text(path));
}

void write_detections(const std::vector<det::Detection>& dets, const std::filesystem::path& path) {
  write_text(path, format_detections(dets));
}

}  // namespace srdet::io
