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

#ifndef PODR_TRANSIENT_HPP
#define PODR_TRANSIENT_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "podr/field.hpp"

namespace podr {

/// Parameters of the synthetic time-periodic wake surrogate.
///
/// The streamfunction is a uniform stream plus four traveling vortex rows
///   psi = U y + sum_k a_k sin(m_k pi y) sin(2 pi p_k x - 2 pi q_k t / T + phi_k)
/// with irrational streamwise wavenumbers p_k, integer temporal harmonics q_k
/// and integer wall-normal mode numbers m_k. psi vanishes along y = 0, so the
/// bottom wall carries no normal flow.
struct TransientModes {
    static constexpr int kModes = 4;
    double mean_speed = 1.0;
    std::array<double, kModes> amplitude{};
    std::array<double, kModes> phase{};
    std::array<double, kModes> wavenumber{};
    std::array<int, kModes> harmonic{};
    std::array<int, kModes> wall_mode{};
};

/// Draws amplitudes and phases from `seed`; wavenumbers and harmonics are fixed.
TransientModes transient_modes(std::uint64_t seed);

/// Analytic streamfunction of the surrogate at (x, y) and step t.
double transient_streamfunction(const TransientModes &modes, double x, double y, long long step, int period);

/// Velocity fields for steps 0 .. n_steps-1 on an nx-by-ny grid.
///
/// Velocities are central differences of the analytic streamfunction sampled
/// on the grid extended by one ghost layer, which makes the discrete
/// central-difference divergence vanish to round-off. Step t and t + period
/// are bitwise identical.
std::vector<VelocityField> generate_transient(int n_steps, int period, int nx, int ny, std::uint64_t seed);

/// Single step of the same sequence.
VelocityField transient_step(const TransientModes &modes, long long step, int period, int nx, int ny);

}  // namespace podr

#endif  // PODR_TRANSIENT_HPP
