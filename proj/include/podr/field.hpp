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

#ifndef PODR_FIELD_HPP
#define PODR_FIELD_HPP

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <vector>

namespace podr {

/// Real scalar field sampled on an nx-by-ny uniform grid spanning the unit
/// square. Storage is row-major with x fastest: value(i, j) = values[i + nx*j],
/// so that the binary index of a grid point lists the x bits before the y bits.
class Field2D {
   public:
    Field2D() = default;
    Field2D(int nx, int ny);
    Field2D(int nx, int ny, Eigen::VectorXd values);

    int nx() const noexcept { return nx_; }
    int ny() const noexcept { return ny_; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(values_.size()); }

    double &operator()(int i, int j) { return values_[i + nx_ * j]; }
    double operator()(int i, int j) const { return values_[i + nx_ * j]; }

    const Eigen::VectorXd &values() const noexcept { return values_; }
    Eigen::VectorXd &values() noexcept { return values_; }

    double hx() const noexcept { return 1.0 / (nx_ - 1); }
    double hy() const noexcept { return 1.0 / (ny_ - 1); }

    bool all_finite() const { return values_.allFinite(); }

    friend bool operator==(const Field2D &a, const Field2D &b);

   private:
    int nx_ = 0;
    int ny_ = 0;
    Eigen::VectorXd values_;
};

/// Paired velocity components of one flow state.
struct VelocityField {
    Field2D ux;
    Field2D uy;
};

enum class FlowKind { CavitySteady, SyntheticTransient, Ingested };

struct FlowCase {
    FlowKind kind = FlowKind::CavitySteady;
    double reynolds = 100.0;
    int timestep = 0;
    double lid_speed = 1.0;
};

bool is_power_of_two(long long v) noexcept;
int log2_exact(long long v);

/// Throws NumericalError naming the first snapshot index holding NaN or Inf.
void require_finite(std::span<const Field2D> fields);

/// Central-difference divergence du_x/dx + du_y/dy at interior nodes; boundary
/// entries are zero.
Field2D discrete_divergence(const Field2D &ux, const Field2D &uy);

/// Largest |divergence| over interior nodes.
double max_interior_divergence(const Field2D &ux, const Field2D &uy);

}  // namespace podr

#endif  // PODR_FIELD_HPP
