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
#include <vector>

#include "srdet/det/detector.hpp"
#include "srdet/sr/checkpoint.hpp"

namespace srdet::det {

// "meta.detector" holds: input_channels, n, n backbone channels, rpn_channels,
// n, n anchor scales, n, n aspect ratios, feature_stride, num_classes,
// pool_size, fc_dim.
sr::CheckpointTensor detector_meta(const DetectorSpec& spec);
DetectorSpec detector_spec_from(const std::vector<sr::CheckpointTensor>& entries);

void save_checkpoint(const Detector<float>& net, const std::filesystem::path& path);
void load_checkpoint(Detector<float>& net, const std::filesystem::path& path);
// Rebuilds the detector from the spec stored in the file.
Detector<float> load_detector(const std::filesystem::path& path);

}  // namespace srdet::det
