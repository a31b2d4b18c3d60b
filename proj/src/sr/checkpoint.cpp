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

#include "srdet/sr/checkpoint.hpp"

#include <zlib.h>

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>

namespace srdet::sr {
namespace {

constexpr char kMagic[4] = {'S', 'R', 'D', 'T'};
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 31;

static_assert(std::endian::native == std::endian::little,
              "checkpoint codec assumes a little-endian host");

class Writer {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u16(std::uint16_t v) { raw(&v, 2); }
  void u32(std::uint32_t v) { raw(&v, 4); }
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    buf_.insert(buf_.end(), b, b + n);
  }
  std::vector<std::uint8_t>& bytes() { return buf_; }

 private:
  std::vector<std::uint8_t> buf_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  void take(void* dst, std::size_t n, const char* what) {
    if (bytes_.size() - pos_ < n) {
      throw CheckpointError(CheckpointErrorKind::kTruncated,
                            std::string("file ends inside ") + what + " at byte " +
                                std::to_string(bytes_.size()));
    }
    std::memcpy(dst, bytes_.data() + pos_, n);
    pos_ += n;
  }
  std::uint8_t u8(const char* what) {
    std::uint8_t v;
    take(&v, 1, what);
    return v;
  }
  std::uint16_t u16(const char* what) {
    std::uint16_t v;
    take(&v, 2, what);
    return v;
  }
  std::uint32_t u32(const char* what) {
    std::uint32_t v;
    take(&v, 4, what);
    return v;
  }
  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

const char* to_string(CheckpointErrorKind kind) {
  switch (kind) {
    case CheckpointErrorKind::kIo: return "io";
    case CheckpointErrorKind::kBadMagic: return "bad-magic";
    case CheckpointErrorKind::kVersion: return "version";
    case CheckpointErrorKind::kTruncated: return "truncated";
    case CheckpointErrorKind::kChecksum: return "checksum";
    case CheckpointErrorKind::kMalformed: return "malformed";
    case CheckpointErrorKind::kSpecMismatch: return "spec-mismatch";
    case CheckpointErrorKind::kShapeMismatch: return "shape-mismatch";
    case CheckpointErrorKind::kMissingTensor: return "missing-tensor";
  }
  return "unknown";
}

std::uint32_t crc32(std::span<const std::uint8_t> bytes) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks for very large archives.
  std::size_t off = 0;
  while (off < bytes.size()) {
    const std::size_t n = std::min<std::size_t>(bytes.size() - off, 1u << 30);
    crc = ::crc32(crc, bytes.data() + off, static_cast<uInt>(n));
    off += n;
  }
  return static_cast<std::uint32_t>(crc);
}

std::vector<std::uint8_t> encode_checkpoint(const std::vector<CheckpointTensor>& tensors) {
  Writer w;
  w.raw(kMagic, 4);
  w.u8(kCheckpointVersion);
  w.u32(static_cast<std::uint32_t>(tensors.size()));
  for (const CheckpointTensor& t : tensors) {
    if (t.name.size() > std::numeric_limits<std::uint16_t>::max()) {
      throw CheckpointError(CheckpointErrorKind::kMalformed, "tensor name too long: " + t.name);
    }
    if (t.shape.empty() || t.shape.size() > 255) {
      throw CheckpointError(CheckpointErrorKind::kMalformed, "unsupported rank for " + t.name);
    }
    if (shape_numel(t.shape) != t.data.size()) {
      throw CheckpointError(CheckpointErrorKind::kMalformed, "shape/data mismatch for " + t.name);
    }
    w.u16(static_cast<std::uint16_t>(t.name.size()));
    w.raw(t.name.data(), t.name.size());
    w.u8(static_cast<std::uint8_t>(t.shape.size()));
    for (std::size_t d : t.shape) w.u32(static_cast<std::uint32_t>(d));
    w.raw(t.data.data(), t.data.size() * sizeof(float));
  }
  const std::uint32_t crc = crc32(w.bytes());
  w.u32(crc);
  return std::move(w.bytes());
}

std::vector<CheckpointTensor> decode_checkpoint(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  char magic[4];
  r.take(magic, 4, "magic");
  if (std::memcmp(magic, kMagic, 4) != 0) {
    throw CheckpointError(CheckpointErrorKind::kBadMagic, "not an SRDT archive");
  }
  const std::uint8_t version = r.u8("version");
  if (version != kCheckpointVersion) {
    throw CheckpointError(CheckpointErrorKind::kVersion,
                          "unsupported version " + std::to_string(version));
  }
  const std::uint32_t count = r.u32("tensor count");
  std::vector<CheckpointTensor> out;
  for (std::uint32_t i = 0; i < count; ++i) {
    CheckpointTensor t;
    const std::uint16_t name_len = r.u16("name length");
    t.name.resize(name_len);
    r.take(t.name.data(), name_len, "tensor name");
    const std::uint8_t rank = r.u8("rank");
    if (rank == 0) {
      throw CheckpointError(CheckpointErrorKind::kMalformed, "zero rank for " + t.name);
    }
    std::uint64_t numel = 1;
    for (std::uint8_t k = 0; k < rank; ++k) {
      const std::uint32_t d = r.u32("dimensions");
      if (d == 0) throw CheckpointError(CheckpointErrorKind::kMalformed, "zero dim in " + t.name);
      numel *= d;
      if (numel > kMaxElements) {
        throw CheckpointError(CheckpointErrorKind::kMalformed, "tensor too large: " + t.name);
      }
      t.shape.push_back(d);
    }
    if (r.remaining() < numel * sizeof(float)) {
      throw CheckpointError(CheckpointErrorKind::kTruncated,
                            "file ends inside data of " + t.name + " at byte " +
                                std::to_string(bytes.size()));
    }
    t.data.resize(numel);
    r.take(t.data.data(), numel * sizeof(float), "tensor data");
    out.push_back(std::move(t));
  }
  const std::size_t body = r.pos();
  const std::uint32_t stored = r.u32("checksum");
  if (r.remaining() != 0) {
    throw CheckpointError(CheckpointErrorKind::kMalformed,
                          std::to_string(r.remaining()) + " trailing bytes after checksum");
  }
  if (crc32(bytes.first(body)) != stored) {
    throw CheckpointError(CheckpointErrorKind::kChecksum, "CRC-32 mismatch");
  }
  return out;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError(CheckpointErrorKind::kIo, "cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_checkpoint_file(const std::filesystem::path& path,
                           const std::vector<CheckpointTensor>& tensors) {
  const std::vector<std::uint8_t> bytes = encode_checkpoint(tensors);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError(CheckpointErrorKind::kIo, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError(CheckpointErrorKind::kIo, "write failed: " + path.string());
}

std::vector<CheckpointTensor> read_checkpoint_file(const std::filesystem::path& path) {
  return decode_checkpoint(read_file_bytes(path));
}

std::vector<CheckpointTensor> to_checkpoint(const std::vector<NamedTensor<float>>& params,
                                            const CheckpointTensor* meta) {
  std::vector<CheckpointTensor> out;
  if (meta != nullptr) out.push_back(*meta);
  for (const auto& p : params) {
    out.push_back({p.name, p.tensor.shape(),
                   std::vector<float>(p.tensor.data().begin(), p.tensor.data().end())});
  }
  return out;
}

void assign_parameters(const std::vector<NamedTensor<float>>& params,
                       const std::vector<CheckpointTensor>& entries) {
  std::map<std::string, const CheckpointTensor*> by_name;
  for (const auto& e : entries) {
    if (e.name.rfind("meta.", 0) == 0) continue;
    by_name[e.name] = &e;
  }
  // Validate everything before touching any parameter.
  for (const auto& p : params) {
    auto it = by_name.find(p.name);
    if (it == by_name.end()) {
      throw CheckpointError(CheckpointErrorKind::kMissingTensor, "no tensor named " + p.name);
    }
    if (it->second->shape != p.tensor.shape()) {
      throw CheckpointError(CheckpointErrorKind::kShapeMismatch,
                            p.name + " is " + shape_str(it->second->shape) + ", network expects " +
                                shape_str(p.tensor.shape()));
    }
  }
  if (by_name.size() != params.size()) {
    throw CheckpointError(CheckpointErrorKind::kShapeMismatch,
                          "archive holds " + std::to_string(by_name.size()) +
                              " parameter tensors, network has " + std::to_string(params.size()));
  }
  for (const auto& p : params) {
    const CheckpointTensor* e = by_name.at(p.name);
    Tensor<float> t = p.tensor;
    std::copy(e->data.begin(), e->data.end(), t.mutable_data().begin());
  }
}

const CheckpointTensor& find_tensor(const std::vector<CheckpointTensor>& entries,
                                    const std::string& name) {
  for (const auto& e : entries) {
    if (e.name == name) return e;
  }
  throw CheckpointError(CheckpointErrorKind::kMissingTensor, "no tensor named " + name);
}

namespace {

std::size_t as_count(float v, const char* field) {
  if (!(v >= 0.0f) || v != std::floor(v) || v > 1e6f) {
    throw CheckpointError(CheckpointErrorKind::kMalformed,
                          std::string("bad value for ") + field + " in spec echo");
  }
  return static_cast<std::size_t>(v);
}

// A double splits exactly into three f32 parts: 24 + 24 + 5 significand bits.
std::array<float, 3> split_double(double v) {
  const float hi = static_cast<float>(v);
  const double r = v - static_cast<double>(hi);
  const float mid = static_cast<float>(r);
  return {hi, mid, static_cast<float>(r - static_cast<double>(mid))};
}

double join_double(float hi, float mid, float lo) {
  return static_cast<double>(hi) + static_cast<double>(mid) + static_cast<double>(lo);
}

}  // namespace

CheckpointTensor generator_meta(const GeneratorSpec& spec) {
  const auto beta = split_double(spec.residual_beta);
  return {"meta.generator",
          {8},
          {static_cast<float>(spec.num_rrdb), static_cast<float>(spec.base_channels),
           static_cast<float>(spec.growth_channels), beta[0], beta[1], beta[2],
           static_cast<float>(spec.scale_factor), static_cast<float>(spec.input_channels)}};
}

GeneratorSpec generator_spec_from(const std::vector<CheckpointTensor>& entries) {
  const CheckpointTensor& m = find_tensor(entries, "meta.generator");
  if (m.data.size() != 8) {
    throw CheckpointError(CheckpointErrorKind::kMalformed, "meta.generator must hold 8 values");
  }
  GeneratorSpec spec;
  spec.num_rrdb = as_count(m.data[0], "num_rrdb");
  spec.base_channels = as_count(m.data[1], "base_channels");
  spec.growth_channels = as_count(m.data[2], "growth_channels");
  spec.residual_beta = join_double(m.data[3], m.data[4], m.data[5]);
  spec.scale_factor = as_count(m.data[6], "scale_factor");
  spec.input_channels = as_count(m.data[7], "input_channels");
  return spec;
}

CheckpointTensor discriminator_meta(const DiscriminatorSpec& spec) {
  CheckpointTensor m{"meta.discriminator", {}, {}};
  m.data.push_back(static_cast<float>(spec.input_channels));
  for (const ConvStage& s : spec.conv_stages) {
    m.data.push_back(static_cast<float>(s.out_channels));
    m.data.push_back(static_cast<float>(s.stride));
  }
  m.shape = {m.data.size()};
  return m;
}

DiscriminatorSpec discriminator_spec_from(const std::vector<CheckpointTensor>& entries) {
  const CheckpointTensor& m = find_tensor(entries, "meta.discriminator");
  if (m.data.empty() || m.data.size() % 2 != 1) {
    throw CheckpointError(CheckpointErrorKind::kMalformed, "meta.discriminator has bad length");
  }
  DiscriminatorSpec spec;
  spec.input_channels = as_count(m.data[0], "input_channels");
  spec.conv_stages.clear();
  for (std::size_t i = 1; i < m.data.size(); i += 2) {
    spec.conv_stages.push_back({as_count(m.data[i], "out_channels"),
                                as_count(m.data[i + 1], "stride")});
  }
  return spec;
}

void save_checkpoint(const Generator<float>& net, const std::filesystem::path& path) {
  const CheckpointTensor meta = generator_meta(net.spec());
  write_checkpoint_file(path, to_checkpoint(net.parameters(), &meta));
}

void load_checkpoint(Generator<float>& net, const std::filesystem::path& path) {
  const auto entries = read_checkpoint_file(path);
  if (!(generator_spec_from(entries) == net.spec())) {
    throw CheckpointError(CheckpointErrorKind::kSpecMismatch,
                          path.string() + " was written by a different generator spec");
  }
  assign_parameters(net.parameters(), entries);
}

Generator<float> load_generator(const GeneratorSpec& spec, const std::filesystem::path& path) {
  Generator<float> net(spec, 0);
  load_checkpoint(net, path);
  return net;
}

Generator<float> load_generator(const std::filesystem::path& path) {
  const auto entries = read_checkpoint_file(path);
  GeneratorSpec spec = generator_spec_from(entries);
  try {
    spec.validate();
  } catch (const ValidationError& e) {
    throw CheckpointError(CheckpointErrorKind::kMalformed, e.what());
  }
  Generator<float> net(spec, 0);
  assign_parameters(net.parameters(), entries);
  return net;
}

void save_checkpoint(const Discriminator<float>& net, const std::filesystem::path& path) {
  const CheckpointTensor meta = discriminator_meta(net.spec());
  write_checkpoint_file(path, to_checkpoint(net.parameters(), &meta));
}

void load_checkpoint(Discriminator<float>& net, const std::filesystem::path& path) {
  const auto entries = read_checkpoint_file(path);
  if (!(discriminator_spec_from(entries) == net.spec())) {
    throw CheckpointError(CheckpointErrorKind::kSpecMismatch,
                          path.string() + " was written by a different discriminator spec");
  }
  assign_parameters(net.parameters(), entries);
}

}  // namespace srdet::sr
