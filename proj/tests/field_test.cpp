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

#include <cmath>
#include <limits>
#include <vector>

#include "podr/error.hpp"
#include "podr/field.hpp"

namespace podr {
namespace {

TEST(Field2D, RowMajorXFastest) {
    Field2D f(4, 2);
    f(3, 1) = 7.0;
    EXPECT_EQ(f.values()[3 + 4 * 1], 7.0);
    EXPECT_DOUBLE_EQ(f.hx(), 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(f.hy(), 1.0);
}

TEST(Field2D, RejectsMismatchedStorage) {
    EXPECT_THROW(Field2D(4, 4, Eigen::VectorXd::Zero(15)), ConfigError);
    EXPECT_THROW(Field2D(0, 4), ConfigError);
}

TEST(Field2D, EqualityIsBitwise) {
    Field2D a(2, 2);
    Field2D b(2, 2);
    EXPECT_TRUE(a == b);
    b(0, 0) = -0.0;
    EXPECT_FALSE(a == b);
}

TEST(Field2D, PowerOfTwoHelpers) {
    EXPECT_TRUE(is_power_of_two(1));
    EXPECT_TRUE(is_power_of_two(4096));
    EXPECT_FALSE(is_power_of_two(0));
    EXPECT_FALSE(is_power_of_two(48));
    EXPECT_EQ(log2_exact(4096), 12);
    EXPECT_THROW(log2_exact(12), ConfigError);
}

TEST(Field2D, NonFiniteSnapshotIsNamed) {
    std::vector<Field2D> fields(3, Field2D(2, 2));
    fields[2](1, 1) = std::numeric_limits<double>::quiet_NaN();
    try {
        require_finite(fields);
        FAIL() << "expected a NumericalError";
    } catch (const NumericalError &e) {
        EXPECT_NE(std::string(e.what()).find("snapshot 2"), std::string::npos);
    }
}

TEST(Divergence, LinearFieldIsExact) {
    // u = (x, -y) is divergence free; u = (x, y) has divergence 2.
    Field2D ux(8, 8), uy(8, 8), vy(8, 8);
    for (int j = 0; j < 8; ++j) {
        for (int i = 0; i < 8; ++i) {
            ux(i, j) = i * ux.hx();
            uy(i, j) = -j * ux.hy();
            vy(i, j) = j * ux.hy();
        }
    }
    EXPECT_LT(max_interior_divergence(ux, uy), 1e-12);
    const Field2D d = discrete_divergence(ux, vy);
    EXPECT_NEAR(d(3, 4), 2.0, 1e-12);
    EXPECT_EQ(d(0, 4), 0.0);
}

}  // namespace
}  // namespace podr
