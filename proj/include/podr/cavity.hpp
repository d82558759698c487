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

#ifndef PODR_CAVITY_HPP
#define PODR_CAVITY_HPP

#include <vector>

#include "podr/field.hpp"

namespace podr {

struct CavityOptions {
    double reynolds = 100.0;
    int nx = 64;
    int ny = 64;
    double tol = 1e-8;
    int max_iters = 200;
    double lid_speed = 1.0;
    /// Reject grids that cannot be amplitude-encoded (non power-of-two sides).
    bool encode_bound = true;
    /// Initial pseudo-time step; grows as the residual falls.
    double initial_dtau = 0.05;
};

struct CavitySolution {
    Field2D ux;
    Field2D uy;
    Field2D psi;
    Field2D omega;
    int iterations = 0;
    /// Max pointwise residual of the steady vorticity-transport equation per
    /// accepted pseudo-time step.
    std::vector<double> residual_history;
    double final_residual = 0.0;
};

/// Steady lid-driven cavity on the unit square, vorticity-streamfunction form.
///
/// Unknowns are the interior streamfunction and vorticity. Walls carry psi = 0
/// and Thom's wall-vorticity closure; the top wall moves with lid_speed in +x.
/// Second-order central differences throughout. The steady equations are
/// reached by implicit pseudo-time marching: each step solves the
/// Newton-linearised system with an added 1/dtau term on the vorticity rows,
/// and dtau grows as the residual decreases (switched evolution relaxation).
///
/// Velocities are recovered as central differences of psi, so the discrete
/// central-difference divergence vanishes at every interior node up to
/// round-off.
///
/// Throws ConvergenceError (carrying the last residual) if the tolerance is not
/// met within max_iters pseudo-time steps, ConfigError on bad arguments.
CavitySolution solve_cavity(const CavityOptions &opts);

/// Convenience overload returning only (u_x, u_y).
VelocityField solve_cavity(double re, int nx, int ny, double tol = 1e-8, int max_iters = 200);

/// Bilinear interpolation of a unit-square field at (x, y).
double sample_bilinear(const Field2D &f, double x, double y);

/// u_x(x = 0.5, y_j) on the nodes y_j of the field's own grid.
Eigen::VectorXd vertical_centerline(const Field2D &ux);

/// The fine field's vertical centerline interpolated at the coarse grid's y nodes.
Eigen::VectorXd vertical_centerline_on(const Field2D &fine_ux, int coarse_ny);

}  // namespace podr

#endif  // PODR_CAVITY_HPP
