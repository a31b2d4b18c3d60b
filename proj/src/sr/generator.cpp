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

#include "srdet/sr/generator.hpp"

#include <string>

namespace srdet::sr {

void GeneratorSpec::validate() const {
  if (num_rrdb > 64) throw ValidationError("generator: num_rrdb must be at most 64");
  if (base_channels == 0) throw ValidationError("generator: base_channels must be positive");
  if (growth_channels == 0) throw ValidationError("generator: growth_channels must be positive");
  if (!(residual_beta > 0.0 && residual_beta <= 1.0)) {
    throw ValidationError("generator: residual_beta must lie in (0, 1]");
  }
  if (scale_factor != 2 && scale_factor != 4) {
    throw ValidationError("generator: scale_factor must be 2 or 4");
  }
  if (input_channels == 0) throw ValidationError("generator: input_channels must be positive");
}

std::size_t GeneratorSpec::upsample_stages() const {
  std::size_t n = 0;
  for (std::size_t s = scale_factor; s > 1; s /= 2) ++n;
  return n;
}

template <typename T>
Generator<T>::Generator(const GeneratorSpec& spec, std::uint64_t seed) : spec_(spec) {
  spec_.validate();
  Rng rng(seed);
  const std::size_t nf = spec_.base_channels, gc = spec_.growth_channels;
  first_ = Conv2d<T>("first", spec_.input_channels, nf, 3, 1, 1, rng);
  rrdbs_.resize(spec_.num_rrdb);
  for (std::size_t r = 0; r < spec_.num_rrdb; ++r) {
    for (std::size_t b = 0; b < 3; ++b) {
      const std::string prefix = "rrdb." + std::to_string(r) + ".dense." + std::to_string(b);
      DenseBlock& db = rrdbs_[r].blocks[b];
      for (std::size_t k = 0; k < 5; ++k) {
        const std::size_t out = k == 4 ? nf : gc;
        db.convs[k] = Conv2d<T>(prefix + ".conv" + std::to_string(k), nf + k * gc, out, 3, 1, 1, rng);
      }
    }
  }
  trunk_ = Conv2d<T>("trunk", nf, nf, 3, 1, 1, rng);
  for (std::size_t u = 0; u < spec_.upsample_stages(); ++u) {
    upsample_.emplace_back("upsample." + std::to_string(u), nf, nf * 4, 3, 1, 1, rng);
  }
  final_ = Conv2d<T>("final", nf, spec_.input_channels, 3, 1, 1, rng);
}

template <typename T>
Tensor<T> Generator<T>::dense_block_forward(const DenseBlock& db, const Tensor<T>& x,
                                            Tape<T>* tape) const {
  std::vector<Tensor<T>> features{x};
  for (std::size_t k = 0; k < 4; ++k) {
    const Tensor<T> in = features.size() == 1 ? x : ops::concat(features, tape);
    features.push_back(ops::leaky_relu(db.convs[k](in, tape), kLeakySlope, tape));
  }
  const Tensor<T> last = db.convs[4](ops::concat(features, tape), tape);
  return ops::add(x, ops::scale(last, spec_.residual_beta, tape), tape);
}

template <typename T>
Tensor<T> Generator<T>::rrdb_forward(std::size_t block, const Tensor<T>& x, Tape<T>* tape) const {
  if (block >= rrdbs_.size()) throw ContractError("rrdb_forward: block index out of range");
  if (x.rank() != 3 || x.dim(0) != spec_.base_channels) {
    throw ShapeError("rrdb_forward: expected " + std::to_string(spec_.base_channels) +
                     " channels, got " + shape_str(x.shape()));
  }
  Tensor<T> h = x;
  for (const DenseBlock& db : rrdbs_[block].blocks) h = dense_block_forward(db, h, tape);
  return ops::add(x, ops::scale(ops::sub(h, x, tape), spec_.residual_beta, tape), tape);
}

template <typename T>
Tensor<T> Generator<T>::first_conv_forward(const Tensor<T>& lr, Tape<T>* tape) const {
  if (lr.rank() != 3 || lr.dim(0) != spec_.input_channels) {
    throw ShapeError("generator: expected " + std::to_string(spec_.input_channels) +
                     "-channel [C,H,W] input, got " + shape_str(lr.shape()));
  }
  return first_(lr, tape);
}

template <typename T>
Tensor<T> Generator<T>::rrdb_stack_forward(const Tensor<T>& x, Tape<T>* tape) const {
  Tensor<T> h = x;
  for (std::size_t r = 0; r < rrdbs_.size(); ++r) h = rrdb_forward(r, h, tape);
  return h;
}

template <typename T>
Tensor<T> Generator<T>::forward(const Tensor<T>& lr, Tape<T>* tape) const {
  const Tensor<T> f = first_conv_forward(lr, tape);
  Tensor<T> fea = ops::add(f, trunk_(rrdb_stack_forward(f, tape), tape), tape);
  for (const Conv2d<T>& up : upsample_) {
    fea = ops::leaky_relu(ops::pixel_shuffle(up(fea, tape), 2, tape), kLeakySlope, tape);
  }
  return ops::clamp(final_(fea, tape), 0.0, 1.0, tape);
}

template <typename T>
std::vector<NamedTensor<T>> Generator<T>::parameters() const {
  std::vector<NamedTensor<T>> out;
  first_.collect(out);
  for (const Rrdb& r : rrdbs_) {
    for (const DenseBlock& db : r.blocks) {
      for (const Conv2d<T>& c : db.convs) c.collect(out);
    }
  }
  trunk_.collect(out);
  for (const Conv2d<T>& up : upsample_) up.collect(out);
  final_.collect(out);
  return out;
}

template <typename T>
std::vector<NamedTensor<T>> Generator<T>::dense_path_parameters(std::size_t block) const {
  std::vector<NamedTensor<T>> out;
  for (const DenseBlock& db : rrdbs_.at(block).blocks) {
    for (const Conv2d<T>& c : db.convs) c.collect(out);
  }
  return out;
}

template class Generator<float>;
template class Generator<double>;

}  // namespace srdet::sr
