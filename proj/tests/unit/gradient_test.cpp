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

#include <gtest/gtest.h>

#include "gradcheck.hpp"

namespace srdet::checks {
namespace {

TEST(GradientTest, EveryOpMatchesCentralDifferences) {
  for (const auto& c : op_gradient_checks(2026)) {
    EXPECT_LE(c.max_rel_error, kOpGradientTolerance) << c.name;
    EXPECT_GT(c.entries, 0u) << c.name;
  }
}

TEST(GradientTest, GeneratorObjectiveMatchesCentralDifferences) {
  const GradCheck c = composite_gradient_check(2026);
  EXPECT_LE(c.max_rel_error, kCompositeGradientTolerance);
  EXPECT_GT(c.entries, 50u);
  EXPECT_LE(c.skipped * 20, c.entries) << "too many kink-straddling entries";
}

}  // namespace
}  // namespace srdet::checks
