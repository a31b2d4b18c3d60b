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

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "srdet/det/box.hpp"

namespace srdet::io {

// One ground truth per line: "class_id x_min y_min x_max y_max". Blank lines
// and '#' comments are skipped. Malformed lines raise ParseError(kMalformed)
// at the offset of the line start.
std::vector<det::GroundTruth> parse_annotations(std::string_view text);
std::string format_annotations(const std::vector<det::GroundTruth>& gts);
std::vector<det::GroundTruth> read_annotations(const std::filesystem::path& path);
void write_annotations(const std::vector<det::GroundTruth>& gts, const std::filesystem::path& path);

// One detection per line: "class_id score x_min y_min x_max y_max", reals in
// 6-decimal fixed point.
std::vector<det::Detection> parse_detections(std::string_view text);
std::string format_detections(const std::vector<det::Detection>& dets);
std::vector<det::Detection> read_detections(const std::filesystem::path& path);
void write_detections(const std::vector<det::Detection>& dets, const std::filesystem::path& path);

}  // namespace srdet::io
