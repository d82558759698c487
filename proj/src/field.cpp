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

#include "podr/field.hpp"

#include <cmath>
#include <cstring>
#include <string>

#include "podr/error.hpp"

namespace podr {

Field2D::Field2D(int nx, int ny) : Field2D(nx, ny, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nx) * ny)) {}

Field2D::Field2D(int nx, int ny, Eigen::VectorXd values) : nx_(nx), ny_(ny), values_(std::move(values)) {
    if (nx <= 0 || ny <= 0) {
        throw ConfigError("Field2D dimensions must be positive, got " + std::to_string(nx) + "x" + std::to_string(ny));
    }
    if (values_.size() != static_cast<Eigen::Index>(nx) * ny) {
        throw ConfigError("Field2D value count " + std::to_string(values_.size()) + " does not match " +
                          std::to_string(nx) + "x" + std::to_string(ny));
    }
}

bool operator==(const Field2D &a, const Field2D &b) {
    if (a.nx_ != b.nx_ || a.ny_ != b.ny_) {
        return false;
    }
    // Bitwise comparison: -0.0 vs 0.0 and NaN payloads must round-trip too.
    return std::memcmp(a.values_.data(), b.values_.data(), a.size() * sizeof(double)) == 0;
}

bool is_power_of_two(long long v) noexcept { return v > 0 && (v & (v - 1)) == 0; }

int log2_exact(long long v) {
    if (!is_power_of_two(v)) {
        throw ConfigError("expected a power of two, got " + std::to_string(v));
    }
    int n = 0;
    while ((1LL << n) < v) {
        ++n;
    }
    return n;
}

void require_finite(std::span<const Field2D> fields) {
    for (std::size_t k = 0; k < fields.size(); ++k) {
        if (!fields[k].all_finite()) {
            throw NumericalError("snapshot " + std::to_string(k) + " contains NaN or Inf values");
        }
    }
}

Field2D discrete_divergence(const Field2D &ux, const Field2D &uy) {
    if (ux.nx() != uy.nx() || ux.ny() != uy.ny()) {
        throw ConfigError("divergence: component grids differ");
    }
    const int nx = ux.nx();
    const int ny = ux.ny();
    Field2D div(nx, ny);
    const double hx = ux.hx();
    const double hy = ux.hy();
    for (int j = 1; j < ny - 1; ++j) {
        for (int i = 1; i < nx - 1; ++i) {
            div(i, j) = (ux(i + 1, j) - ux(i - 1, j)) / (2.0 * hx) + (uy(i, j + 1) - uy(i, j - 1)) / (2.0 * hy);
        }
    }
    return div;
}

double max_interior_divergence(const Field2D &ux, const Field2D &uy) {
    return discrete_divergence(ux, uy).values().cwiseAbs().maxCoeff();
}

}  // namespace podr
