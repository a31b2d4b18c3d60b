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

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "srdet/det/detector.hpp"
#include "srdet/det/trainer.hpp"
#include "srdet/io/dataset.hpp"
#include "srdet/sr/discriminator.hpp"
#include "srdet/sr/generator.hpp"
#include "srdet/train/sr_trainer.hpp"

namespace srdet::io {

// Flat "section.key = value" lines; '#' starts a comment. Later duplicates
// are rejected. Malformed lines raise ValidationError naming the line.
std::map<std::string, std::string> parse_key_values(std::string_view text);

struct DataConfig {
  SyntheticOptions synthetic;
  double test_fraction = 0.2;
  std::uint64_t split_seed = 1;
  // Existing dataset directory holding manifest.tsv; empty means the
  // synthetic set is generated in memory from `synthetic`.
  std::string dir;
};

struct SrConfig {
  sr::GeneratorSpec generator;
  sr::DiscriminatorSpec discriminator;
  train::FeatureExtractorSpec feature_extractor;
  train::SrTrainingOptions training;
  std::uint64_t init_seed = 1;
};

struct DetConfig {
  det::DetectorSpec spec;
  det::DetectConfig detect;
  det::DetTrainingOptions training;
  std::vector<std::string> class_names = default_class_names();
  std::uint64_t init_seed = 1;
};

struct EvalConfig {
  double iou_threshold = 0.5;
};

struct PipelineConfig {
  DataConfig data;
  SrConfig sr;
  DetConfig det;
  EvalConfig eval;

  void validate() const;
};

// Unknown keys and out-of-range values raise ValidationError.
PipelineConfig parse_pipeline_config(std::string_view text);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

// Every key the parser accepts, with its current value, in canonical order.
std::string format_pipeline_config(const PipelineConfig& cfg);

}  // namespace srdet::io
