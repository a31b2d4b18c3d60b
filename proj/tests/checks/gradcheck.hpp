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
#include <string>
#include <vector>

namespace srdet::checks {

inline constexpr double kFiniteDifferenceStep = 1e-4;
inline constexpr double kOpGradientTolerance = 1e-4;
inline constexpr double kCompositeGradientTolerance = 1e-3;

struct GradCheck {
  std::string name;
  double max_rel_error = 0.0;
  std::size_t entries = 0;
  // Entries left out because x + h and x - h fall on different sides of a
  // leaky_relu or clamp kink, where central differences are meaningless.
  std::size_t skipped = 0;
};

// One check per differentiable op: loss = sum(op(inputs) * w) for a fixed
// random w, analytic gradient vs central differences on every input entry.
std::vector<GradCheck> op_gradient_checks(std::uint64_t seed);

// Micro generator + discriminator + feature network under the full generator
// objective, checked on the LR input and a sample of generator parameters.
GradCheck composite_gradient_check(std::uint64_t seed);

}  // namespace srdet::checks
