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

#include "podr/transient.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "podr/error.hpp"

namespace podr {

TransientModes transient_modes(std::uint64_t seed) {
    TransientModes m;
    m.wavenumber = {1.0, std::numbers::sqrt2, std::numbers::sqrt3, std::numbers::phi};
    m.harmonic = {1, 2, 3, 1};
    m.wall_mode = {1, 2, 1, 3};
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> amp(0.02, 0.08);
    std::uniform_real_distribution<double> ph(0.0, 2.0 * std::numbers::pi);
    for (int k = 0; k < TransientModes::kModes; ++k) {
        m.amplitude[k] = amp(rng);
        m.phase[k] = ph(rng);
    }
    return m;
}

double transient_streamfunction(const TransientModes &modes, double x, double y, long long step, int period) {
    using std::numbers::pi;
    // Reduce the step first so that t and t + period share every bit.
    const long long tau = ((step % period) + period) % period;
    const double theta = 2.0 * pi * static_cast<double>(tau) / period;
    double psi = modes.mean_speed * y;
    for (int k = 0; k < TransientModes::kModes; ++k) {
        psi += modes.amplitude[k] * std::sin(modes.wall_mode[k] * pi * y) *
               std::sin(2.0 * pi * modes.wavenumber[k] * x - modes.harmonic[k] * theta + modes.phase[k]);
    }
    return psi;
}

VelocityField transient_step(const TransientModes &modes, long long step, int period, int nx, int ny) {
    const double hx = 1.0 / (nx - 1);
    const double hy = 1.0 / (ny - 1);
    // psi on the grid plus one ghost layer, index (i+1) + (nx+2)*(j+1).
    const int ex = nx + 2;
    std::vector<double> psi(static_cast<std::size_t>(ex) * (ny + 2));
    for (int j = -1; j <= ny; ++j) {
        for (int i = -1; i <= nx; ++i) {
            psi[(i + 1) + ex * (j + 1)] = transient_streamfunction(modes, i * hx, j * hy, step, period);
        }
    }
    auto at = [&](int i, int j) { return psi[(i + 1) + ex * (j + 1)]; };
    VelocityField v{Field2D(nx, ny), Field2D(nx, ny)};
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            v.ux(i, j) = (at(i, j + 1) - at(i, j - 1)) / (2.0 * hy);
            v.uy(i, j) = -(at(i + 1, j) - at(i - 1, j)) / (2.0 * hx);
        }
    }
    return v;
}

std::vector<VelocityField> generate_transient(int n_steps, int period, int nx, int ny, std::uint64_t seed) {
    if (period < 2) {
        throw ConfigError("transient: period must be at least 2");
    }
    if (n_steps < period) {
        throw ConfigError("transient: n_steps must be at least the period");
    }
    if (nx < 2 || ny < 2) {
        throw ConfigError("transient: grid must have at least 2 points per side");
    }
    if (!is_power_of_two(nx) || !is_power_of_two(ny)) {
        throw ConfigError("transient: grid " + std::to_string(nx) + "x" + std::to_string(ny) +
                          " is not a power of two on each side");
    }
    const TransientModes modes = transient_modes(seed);
    std::vector<VelocityField> out;
    out.reserve(n_steps);
    for (int t = 0; t < n_steps; ++t) {
        out.push_back(transient_step(modes, t, period, nx, ny));
    }
    return out;
}

}  // namespace podr
