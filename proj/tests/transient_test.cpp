// Copyright 2026 The PODR Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include "podr/error.hpp"
#include "podr/transient.hpp"

namespace podr {
namespace {

TEST(Transient, ExactlyPeriodic) {
    const auto seq = generate_transient(100, 50, 64, 32, 7);
    ASSERT_EQ(seq.size(), 100u);
    EXPECT_TRUE(seq[10].ux == seq[60].ux);
    EXPECT_TRUE(seq[10].uy == seq[60].uy);
    EXPECT_FALSE(seq[10].ux == seq[11].ux);
}

TEST(Transient, DiscretelyDivergenceFree) {
    const auto seq = generate_transient(60, 50, 64, 32, 3);
    for (const VelocityField &v : seq) {
        EXPECT_LE(max_interior_divergence(v.ux, v.uy), 1e-12);
    }
}

TEST(Transient, NoNormalFlowThroughBottomWall) {
    const VelocityField v = transient_step(transient_modes(11), 5, 50, 32, 32);
    for (int i = 0; i < v.uy.nx(); ++i) {
        EXPECT_NEAR(v.uy(i, 0), 0.0, 1e-14);
    }
}

TEST(Transient, DeterministicPerSeed) {
    const auto a = generate_transient(55, 50, 32, 16, 7);
    const auto b = generate_transient(55, 50, 32, 16, 7);
    const auto c = generate_transient(55, 50, 32, 16, 8);
    for (std::size_t k = 0; k < a.size(); ++k) {
        EXPECT_TRUE(a[k].ux == b[k].ux);
        EXPECT_TRUE(a[k].uy == b[k].uy);
    }
    EXPECT_FALSE(a[0].ux == c[0].ux);
}

TEST(Transient, Preconditions) {
    EXPECT_THROW(generate_transient(10, 1, 16, 16, 1), ConfigError);
    EXPECT_THROW(generate_transient(10, 20, 16, 16, 1), ConfigError);
    EXPECT_THROW(generate_transient(60, 50, 24, 16, 1), ConfigError);
}

}  // namespace
}  // namespace podr
