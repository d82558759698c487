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

#include "podr/cavity.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "podr/error.hpp"

namespace podr {

namespace {

// A grid value expressed as an affine function of at most one unknown:
// value = offset + coef * z[col]. col < 0 means constant.
struct Affine {
    double value;
    int col;
    double coef;
};

class CavitySystem {
   public:
    CavitySystem(const CavityOptions &o)
        : nx_(o.nx),
          ny_(o.ny),
          mx_(o.nx - 2),
          my_(o.ny - 2),
          hx_(1.0 / (o.nx - 1)),
          hy_(1.0 / (o.ny - 1)),
          nu_(1.0 / o.reynolds),
          lid_(o.lid_speed) {}

    int unknowns() const { return 2 * mx_ * my_; }

    // Interleaved layout: psi at 2p, omega at 2p+1, p = (i-1) + mx*(j-1).
    int psi_col(int i, int j) const { return 2 * ((i - 1) + mx_ * (j - 1)); }
    int omega_col(int i, int j) const { return psi_col(i, j) + 1; }
    bool interior(int i, int j) const { return i > 0 && i < nx_ - 1 && j > 0 && j < ny_ - 1; }

    Affine psi_at(const Eigen::VectorXd &z, int i, int j) const {
        if (interior(i, j)) {
            const int c = psi_col(i, j);
            return {z[c], c, 1.0};
        }
        return {0.0, -1, 0.0};
    }

    // Thom's closure on walls: omega_w = -2 psi_adj / h^2 (- 2 U / h on the lid).
    Affine omega_at(const Eigen::VectorXd &z, int i, int j) const {
        if (interior(i, j)) {
            const int c = omega_col(i, j);
            return {z[c], c, 1.0};
        }
        int ai = i;
        int aj = j;
        double h = hx_;
        double extra = 0.0;
        if (i == 0) {
            ai = 1;
        } else if (i == nx_ - 1) {
            ai = nx_ - 2;
        } else if (j == 0) {
            aj = 1;
            h = hy_;
        } else {
            aj = ny_ - 2;
            h = hy_;
            extra = -2.0 * lid_ / hy_;
        }
        const int c = psi_col(ai, aj);
        const double coef = -2.0 / (h * h);
        return {coef * z[c] + extra, c, coef};
    }

    // Residuals of the steady equations at every interior node.
    void residual(const Eigen::VectorXd &z, Eigen::VectorXd &r) const {
        r.resize(unknowns());
        for (int j = 1; j < ny_ - 1; ++j) {
            for (int i = 1; i < nx_ - 1; ++i) {
                r[psi_col(i, j)] = psi_residual(z, i, j);
                r[omega_col(i, j)] = omega_residual(z, i, j);
            }
        }
    }

    // A = diag(1/dtau on vorticity rows) - dR/dz.
    void assemble(const Eigen::VectorXd &z, double dtau, std::vector<Eigen::Triplet<double>> &trip) const {
        trip.clear();
        const double ihx2 = 1.0 / (hx_ * hx_);
        const double ihy2 = 1.0 / (hy_ * hy_);
        for (int j = 1; j < ny_ - 1; ++j) {
            for (int i = 1; i < nx_ - 1; ++i) {
                const int rp = psi_col(i, j);
                const int rw = omega_col(i, j);
                auto add = [&](int row, const Affine &t, double d) {
                    if (t.col >= 0) {
                        trip.emplace_back(row, t.col, -d * t.coef);
                    }
                };

                // Poisson row: lap(psi) + omega.
                add(rp, psi_at(z, i + 1, j), ihx2);
                add(rp, psi_at(z, i - 1, j), ihx2);
                add(rp, psi_at(z, i, j + 1), ihy2);
                add(rp, psi_at(z, i, j - 1), ihy2);
                add(rp, psi_at(z, i, j), -2.0 * (ihx2 + ihy2));
                add(rp, omega_at(z, i, j), 1.0);

                // Transport row.
                const Affine pe = psi_at(z, i + 1, j);
                const Affine pw = psi_at(z, i - 1, j);
                const Affine pn = psi_at(z, i, j + 1);
                const Affine ps = psi_at(z, i, j - 1);
                const Affine we = omega_at(z, i + 1, j);
                const Affine ww = omega_at(z, i - 1, j);
                const Affine wn = omega_at(z, i, j + 1);
                const Affine ws = omega_at(z, i, j - 1);
                const Affine wp = omega_at(z, i, j);
                const double u = (pn.value - ps.value) / (2.0 * hy_);
                const double v = -(pe.value - pw.value) / (2.0 * hx_);
                const double wx = (we.value - ww.value) / (2.0 * hx_);
                const double wy = (wn.value - ws.value) / (2.0 * hy_);

                add(rw, we, nu_ * ihx2 - u / (2.0 * hx_));
                add(rw, ww, nu_ * ihx2 + u / (2.0 * hx_));
                add(rw, wn, nu_ * ihy2 - v / (2.0 * hy_));
                add(rw, ws, nu_ * ihy2 + v / (2.0 * hy_));
                add(rw, wp, -2.0 * nu_ * (ihx2 + ihy2));
                add(rw, pn, -wx / (2.0 * hy_));
                add(rw, ps, wx / (2.0 * hy_));
                add(rw, pe, wy / (2.0 * hx_));
                add(rw, pw, -wy / (2.0 * hx_));
                trip.emplace_back(rw, rw, 1.0 / dtau);
            }
        }
    }

    CavitySolution fields(const Eigen::VectorXd &z) const {
        CavitySolution s;
        s.ux = Field2D(nx_, ny_);
        s.uy = Field2D(nx_, ny_);
        s.psi = Field2D(nx_, ny_);
        s.omega = Field2D(nx_, ny_);
        for (int j = 0; j < ny_; ++j) {
            for (int i = 0; i < nx_; ++i) {
                s.psi(i, j) = psi_at(z, i, j).value;
                const bool corner = (i == 0 || i == nx_ - 1) && (j == 0 || j == ny_ - 1);
                if (!corner) {
                    s.omega(i, j) = omega_at(z, i, j).value;
                }
            }
        }
        for (int j = 1; j < ny_ - 1; ++j) {
            for (int i = 1; i < nx_ - 1; ++i) {
                s.ux(i, j) = (s.psi(i, j + 1) - s.psi(i, j - 1)) / (2.0 * hy_);
                s.uy(i, j) = -(s.psi(i + 1, j) - s.psi(i - 1, j)) / (2.0 * hx_);
            }
        }
        for (int i = 1; i < nx_ - 1; ++i) {
            s.ux(i, ny_ - 1) = lid_;
        }
        return s;
    }

   private:
    double psi_residual(const Eigen::VectorXd &z, int i, int j) const {
        const double p = psi_at(z, i, j).value;
        return (psi_at(z, i + 1, j).value - 2.0 * p + psi_at(z, i - 1, j).value) / (hx_ * hx_) +
               (psi_at(z, i, j + 1).value - 2.0 * p + psi_at(z, i, j - 1).value) / (hy_ * hy_) +
               omega_at(z, i, j).value;
    }

    double omega_residual(const Eigen::VectorXd &z, int i, int j) const {
        const double w = omega_at(z, i, j).value;
        const double we = omega_at(z, i + 1, j).value;
        const double ww = omega_at(z, i - 1, j).value;
        const double wn = omega_at(z, i, j + 1).value;
        const double ws = omega_at(z, i, j - 1).value;
        const double u = (psi_at(z, i, j + 1).value - psi_at(z, i, j - 1).value) / (2.0 * hy_);
        const double v = -(psi_at(z, i + 1, j).value - psi_at(z, i - 1, j).value) / (2.0 * hx_);
        return nu_ * ((we - 2.0 * w + ww) / (hx_ * hx_) + (wn - 2.0 * w + ws) / (hy_ * hy_)) -
               u * (we - ww) / (2.0 * hx_) - v * (wn - ws) / (2.0 * hy_);
    }

    int nx_, ny_, mx_, my_;
    double hx_, hy_, nu_, lid_;
};

struct ResidualNorms {
    double transport;
    double poisson;
};

ResidualNorms norms(const Eigen::VectorXd &r) {
    ResidualNorms n{0.0, 0.0};
    for (Eigen::Index k = 0; k < r.size(); k += 2) {
        n.poisson = std::max(n.poisson, std::abs(r[k]));
        n.transport = std::max(n.transport, std::abs(r[k + 1]));
    }
    if (!r.allFinite()) {
        n.transport = n.poisson = std::numeric_limits<double>::infinity();
    }
    return n;
}

}  // namespace

CavitySolution solve_cavity(const CavityOptions &opts) {
    if (!(opts.reynolds >= 1.0 && opts.reynolds <= 5000.0)) {
        throw ConfigError("cavity: reynolds must lie in [1, 5000]");
    }
    if (opts.nx < 16 || opts.ny < 16) {
        throw ConfigError("cavity: grid must be at least 16x16");
    }
    if (opts.encode_bound && (!is_power_of_two(opts.nx) || !is_power_of_two(opts.ny))) {
        throw ConfigError("cavity: grid " + std::to_string(opts.nx) + "x" + std::to_string(opts.ny) +
                          " is not a power of two on each side");
    }
    if (!(opts.tol > 0.0) || opts.max_iters <= 0 || !(opts.initial_dtau > 0.0)) {
        throw ConfigError("cavity: tol, max_iters and initial_dtau must be positive");
    }

    const CavitySystem sys(opts);
    const int n = sys.unknowns();
    Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd r;
    Eigen::VectorXd r_trial;
    sys.residual(z, r);
    ResidualNorms cur = norms(r);
    const double r0 = std::max(cur.transport, 1e-300);

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(n) * 11);
    Eigen::SparseMatrix<double> a(n, n);
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    bool analysed = false;

    std::vector<double> history{cur.transport};
    double dtau = opts.initial_dtau;
    int iter = 0;
    while (iter < opts.max_iters && !(cur.transport <= opts.tol && cur.poisson <= opts.tol)) {
        ++iter;
        sys.assemble(z, dtau, trip);
        a.setFromTriplets(trip.begin(), trip.end());
        if (!analysed) {
            lu.analyzePattern(a);
            analysed = true;
        }
        lu.factorize(a);
        if (lu.info() != Eigen::Success) {
            throw NumericalError("cavity: sparse factorization failed at pseudo-time step " + std::to_string(iter));
        }
        const Eigen::VectorXd dz = lu.solve(r);
        const Eigen::VectorXd trial = z + dz;
        sys.residual(trial, r_trial);
        const ResidualNorms next = norms(r_trial);
        if (!std::isfinite(next.transport) || next.transport > 4.0 * cur.transport) {
            dtau *= 0.2;
            continue;
        }
        z = trial;
        r.swap(r_trial);
        cur = next;
        history.push_back(cur.transport);
        dtau = std::min(opts.initial_dtau * r0 / std::max(cur.transport, 1e-300), 1e14);
    }

    if (!(cur.transport <= opts.tol && cur.poisson <= opts.tol)) {
        std::ostringstream msg;
        msg << "cavity: no convergence at Re=" << opts.reynolds << " after " << iter
            << " pseudo-time steps (transport residual " << cur.transport << ", poisson residual " << cur.poisson
            << ")";
        throw ConvergenceError(msg.str(), std::max(cur.transport, cur.poisson), iter);
    }

    CavitySolution s = sys.fields(z);
    s.iterations = iter;
    s.residual_history = std::move(history);
    s.final_residual = cur.transport;
    return s;
}

VelocityField solve_cavity(double re, int nx, int ny, double tol, int max_iters) {
    CavityOptions o;
    o.reynolds = re;
    o.nx = nx;
    o.ny = ny;
    o.tol = tol;
    o.max_iters = max_iters;
    CavitySolution s = solve_cavity(o);
    return {std::move(s.ux), std::move(s.uy)};
}

double sample_bilinear(const Field2D &f, double x, double y) {
    const double gx = std::clamp(x, 0.0, 1.0) * (f.nx() - 1);
    const double gy = std::clamp(y, 0.0, 1.0) * (f.ny() - 1);
    const int i0 = std::min(static_cast<int>(gx), f.nx() - 2);
    const int j0 = std::min(static_cast<int>(gy), f.ny() - 2);
    const double tx = gx - i0;
    const double ty = gy - j0;
    return (1 - tx) * (1 - ty) * f(i0, j0) + tx * (1 - ty) * f(i0 + 1, j0) + (1 - tx) * ty * f(i0, j0 + 1) +
           tx * ty * f(i0 + 1, j0 + 1);
}

Eigen::VectorXd vertical_centerline(const Field2D &ux) { return vertical_centerline_on(ux, ux.ny()); }

Eigen::VectorXd vertical_centerline_on(const Field2D &fine_ux, int coarse_ny) {
    Eigen::VectorXd out(coarse_ny);
    for (int j = 0; j < coarse_ny; ++j) {
        out[j] = sample_bilinear(fine_ux, 0.5, static_cast<double>(j) / (coarse_ny - 1));
    }
    return out;
}

}  // namespace podr
