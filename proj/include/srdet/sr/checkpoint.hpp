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
#include <span>
#include <string>
#include <vector>

#include "srdet/core/errors.hpp"
#include "srdet/core/layers.hpp"
#include "srdet/sr/discriminator.hpp"
#include "srdet/sr/generator.hpp"

// "SRDT" checkpoint archive, little-endian throughout:
//
//   "SRDT" | u8 version (1) | u32 tensor count
//   per tensor: u16 name length | UTF-8 name | u8 rank | rank x u32 dims | f32 data
//   u32 CRC-32 (zlib polynomial) over every preceding byte
//
// The network spec that produced a checkpoint is stored alongside the
// parameters as an ordinary tensor named "meta.<network>".
namespace srdet::sr {

enum class CheckpointErrorKind {
  kIo,
  kBadMagic,
  kVersion,
  kTruncated,
  kChecksum,
  kMalformed,
  kSpecMismatch,
  kShapeMismatch,
  kMissingTensor,
};

const char* to_string(CheckpointErrorKind kind);

class CheckpointError : public Error {
 public:
  CheckpointError(CheckpointErrorKind kind, const std::string& what)
      : Error(std::string("checkpoint ") + to_string(kind) + ": " + what), kind_(kind) {}
  CheckpointErrorKind kind() const { return kind_; }

 private:
  CheckpointErrorKind kind_;
};

inline constexpr std::uint8_t kCheckpointVersion = 1;

struct CheckpointTensor {
  std::string name;
  Shape shape;
  std::vector<float> data;
};

std::uint32_t crc32(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_checkpoint(const std::vector<CheckpointTensor>& tensors);
std::vector<CheckpointTensor> decode_checkpoint(std::span<const std::uint8_t> bytes);

void write_checkpoint_file(const std::filesystem::path& path,
                           const std::vector<CheckpointTensor>& tensors);
std::vector<CheckpointTensor> read_checkpoint_file(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);

// Snapshot of named parameters, optionally prefixed by a meta tensor.
std::vector<CheckpointTensor> to_checkpoint(const std::vector<NamedTensor<float>>& params,
                                            const CheckpointTensor* meta = nullptr);

// Copies archived values into `params` after validating every name and shape.
// Entries whose names start with "meta." are ignored. Either every parameter
// is written or none is.
void assign_parameters(const std::vector<NamedTensor<float>>& params,
                       const std::vector<CheckpointTensor>& entries);

const CheckpointTensor& find_tensor(const std::vector<CheckpointTensor>& entries,
                                    const std::string& name);

CheckpointTensor generator_meta(const GeneratorSpec& spec);
GeneratorSpec generator_spec_from(const std::vector<CheckpointTensor>& entries);
CheckpointTensor discriminator_meta(const DiscriminatorSpec& spec);
DiscriminatorSpec discriminator_spec_from(const std::vector<CheckpointTensor>& entries);

void save_checkpoint(const Generator<float>& net, const std::filesystem::path& path);
// Loads into an existing network; the stored spec must equal net.spec().
void load_checkpoint(Generator<float>& net, const std::filesystem::path& path);
Generator<float> load_generator(const GeneratorSpec& spec, const std::filesystem::path& path);
// Rebuilds the generator from the spec stored in the file.
Generator<float> load_generator(const std::filesystem::path& path);

void save_checkpoint(const Discriminator<float>& net, const std::filesystem::path& path);
void load_checkpoint(Discriminator<float>& net, const std::filesystem::path& path);

}  // namespace srdet::sr
