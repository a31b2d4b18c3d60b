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

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <vector>

#include "srdet/core/errors.hpp"
#include "srdet/core/rng.hpp"

namespace srdet::train {

// Yields fixed-size batches of sample indices, reshuffling with a seeded Rng
// at every epoch boundary. A batch never repeats an index within itself.
class BatchSampler {
 public:
  BatchSampler(std::size_t dataset_size, std::size_t batch_size, std::uint64_t seed)
      : order_(dataset_size), cursor_(dataset_size), batch_size_(batch_size), rng_(seed) {
    if (dataset_size == 0) throw ValidationError("batch sampler: empty dataset");
    if (batch_size == 0) throw ValidationError("batch sampler: batch_size must be positive");
  }

  std::vector<std::size_t> next() {
    std::vector<std::size_t> batch;
    while (batch.size() < batch_size_ && batch.size() < order_.size()) {
      if (cursor_ == order_.size()) {
        std::iota(order_.begin(), order_.end(), std::size_t{0});
        rng_.shuffle(order_);
        // Indices already drawn into this batch move to the back of the epoch.
        std::stable_partition(order_.begin(), order_.end(), [&](std::size_t i) {
          return std::find(batch.begin(), batch.end(), i) == batch.end();
        });
        cursor_ = 0;
      }
      batch.push_back(order_[cursor_++]);
    }
    return batch;
  }

 private:
  std::vector<std::size_t> order_;
  std::size_t cursor_;
  std::size_t batch_size_;
  Rng rng_;
};

}  // namespace srdet::train
