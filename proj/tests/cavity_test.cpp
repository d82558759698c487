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

#include "podr/cavity.hpp"
#include "podr/error.hpp"

namespace podr {
namespace {

const CavitySolution &re100_64() {
    static const CavitySolution s = [] {
        CavityOptions o;
        o.reynolds = 100;
        o.tol = 1e-6;
        return solve_cavity(o);
    }();
    return s;
}

TEST(Cavity, LidVelocityImposedExactly) {
    const CavitySolution &s = re100_64();
    const int top = s.ux.ny() - 1;
    for (int i = 1; i + 1 < s.ux.nx(); ++i) {
        EXPECT_EQ(s.ux(i, top), 1.0);
        EXPECT_EQ(s.uy(i, top), 0.0);
    }
    for (int j = 0; j < s.ux.ny(); ++j) {
        EXPECT_EQ(s.ux(0, j), 0.0);
        EXPECT_EQ(s.ux(s.ux.nx() - 1, j), 0.0);
    }
}

TEST(Cavity, DivergenceFreeToTolerance) {
    const CavitySolution &s = re100_64();
    EXPECT_LE(max_interior_divergence(s.ux, s.uy), 10 * 1e-6);
}

TEST(Cavity, ResidualBelowToleranceAndMonotoneAtTheEnd) {
    const CavitySolution &s = re100_64();
    EXPECT_LE(s.final_residual, 1e-6);
    const auto &h = s.residual_history;
    ASSERT_GE(h.size(), 2u);
    const std::size_t tail = std::max<std::size_t>(2, (h.size() + 9) / 10);
    for (std::size_t k = h.size() - tail + 1; k < h.size(); ++k) {
        EXPECT_LE(h[k], h[k - 1]) << "step " << k;
    }
}

TEST(Cavity, CenterlineMatchesPublishedBenchmark) {
    // Minimum of u_x on x = 0.5 at Re = 100 from the classical fine-grid
    // benchmark tables (-0.21090); the 64^2 central scheme lands within 0.005.
    const Eigen::VectorXd c = vertical_centerline(re100_64().ux);
    EXPECT_NEAR(c.minCoeff(), -0.21090, 5e-3);
}

TEST(Cavity, SelfConvergenceAgainstFineGrid) {
    CavityOptions o;
    o.reynolds = 100;
    o.nx = o.ny = 256;
    o.tol = 1e-8;
    const CavitySolution fine = solve_cavity(o);
    double prev = 0.0;
    for (int n : {32, 64}) {
        CavityOptions c = o;
        c.nx = c.ny = n;
        const CavitySolution coarse = solve_cavity(c);
        const Eigen::VectorXd mine = vertical_centerline(coarse.ux);
        const Eigen::VectorXd ref = vertical_centerline_on(fine.ux, n);
        const double rel = (mine - ref).norm() / ref.norm();
        if (n == 64) {
            EXPECT_LE(rel, 0.05);
            EXPECT_GE(prev / rel, 2.0) << "observed order below 1";
        }
        prev = rel;
    }
}

TEST(Cavity, Deterministic) {
    CavityOptions o;
    o.reynolds = 400;
    o.nx = o.ny = 32;
    const CavitySolution a = solve_cavity(o);
    const CavitySolution b = solve_cavity(o);
    EXPECT_TRUE(a.ux == b.ux);
    EXPECT_TRUE(a.uy == b.uy);
}

TEST(Cavity, NonConvergenceCarriesResidual) {
    CavityOptions o;
    o.nx = o.ny = 32;
    o.max_iters = 1;
    o.tol = 1e-14;
    try {
        solve_cavity(o);
        FAIL() << "expected ConvergenceError";
    } catch (const ConvergenceError &e) {
        EXPECT_GT(e.final_residual(), 1e-14);
        EXPECT_EQ(e.iterations(), 1);
    }
}

TEST(Cavity, RejectsBadArguments) {
    CavityOptions o;
    o.nx = 48;
    EXPECT_THROW(solve_cavity(o), ConfigError);
    o.encode_bound = false;
    o.nx = 24;
    o.ny = 24;
    o.max_iters = 400;
    EXPECT_NO_THROW(solve_cavity(o));
    CavityOptions r;
    r.reynolds = 6000;
    EXPECT_THROW(solve_cavity(r), ConfigError);
    r.reynolds = 100;
    r.nx = 8;
    EXPECT_THROW(solve_cavity(r), ConfigError);
    r.nx = 64;
    r.tol = 0;
    EXPECT_THROW(solve_cavity(r), ConfigError);
}

}  // namespace
}  // namespace podr
