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
#include <string>
#include <vector>

#include "srdet/core/errors.hpp"
#include "srdet/core/rng.hpp"
#include "srdet/core/tensor.hpp"
#include "srdet/det/box.hpp"

namespace srdet::io {

class DatasetError : public Error {
 public:
  using Error::Error;
};

// Synthetic shape classes.
inline constexpr int kRectangle = 1;
inline constexpr int kDisk = 2;
inline constexpr int kTriangle = 3;

std::vector<std::string> default_class_names();

struct SampleRecord {
  std::filesystem::path hr;
  std::filesystem::path lr;
  std::filesystem::path annotations;
};

struct Sample {
  Tensor<float> hr;
  Tensor<float> lr;
  std::vector<det::GroundTruth> gts;
};

struct SyntheticOptions {
  std::size_t count = 250;
  std::size_t hr_size = 48;
  std::size_t scale = 4;
  std::size_t min_objects = 1;
  std::size_t max_objects = 3;
  // Shape extents in HR pixels.
  std::size_t min_extent = 12;
  std::size_t max_extent = 22;
  std::uint64_t seed = 1;

  void validate() const;
};

inline constexpr int kMaxPlacementAttempts = 1000;

// Mean over non-overlapping scale x scale blocks. ValidationError unless both
// spatial extents are divisible by scale.
Tensor<float> box_downsample(const Tensor<float>& image, std::size_t scale);

// Nearest-neighbour enlargement by an integer factor.
Tensor<float> nearest_upsample(const Tensor<float>& image, std::size_t scale);

// One image of non-overlapping filled shapes on a textured background.
// Ground-truth boxes are the exact pixel extents of the rendered shapes.
Sample render_synthetic_sample(const SyntheticOptions& options, Rng& rng);

std::vector<Sample> make_synthetic_samples(const SyntheticOptions& options);

// Writes hr/NNNN.ppm, lr/NNNN.ppm, ann/NNNN.txt and manifest.tsv under out_dir.
std::vector<SampleRecord> make_synthetic_dataset(const SyntheticOptions& options,
                                                 const std::filesystem::path& out_dir);

// Manifest lines are "hr<TAB>lr<TAB>annotations"; relative paths resolve
// against the manifest's directory.
std::string format_manifest(const std::vector<SampleRecord>& records);
std::vector<SampleRecord> read_manifest(const std::filesystem::path& path);

// Loads one record and checks lr extents == hr extents / scale.
Sample load_sample(const SampleRecord& record, std::size_t scale);
std::vector<Sample> load_dataset(const std::filesystem::path& manifest, std::size_t scale);

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Seeded shuffle, then the last round(n * test_fraction) indices form the test
// split. Both lists are returned in ascending order.
Split split_indices(std::size_t n, double test_fraction, std::uint64_t seed);

}  // namespace srdet::io
