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

#ifndef PODR_POD_HPP
#define PODR_POD_HPP

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "podr/error.hpp"
#include "podr/field.hpp"

namespace podr {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Column stack of unit-norm flattened snapshots.
template <typename Scalar>
struct SnapshotMatrix {
    MatrixX<Scalar> columns;
    std::vector<double> labels;
    /// Non-fatal observations made while building (duplicate labels).
    std::vector<std::string> warnings;

    Eigen::Index n() const { return columns.rows(); }
    Eigen::Index m() const { return columns.cols(); }
};

/// Thin SVD of a snapshot matrix plus the selected basis count.
///
/// Columns of `u` are the POD bases. Each is signed so that its entry of
/// largest magnitude is positive (lowest index wins ties), with the matching
/// column of `v` flipped alongside.
template <typename Scalar>
struct PodBasis {
    MatrixX<Scalar> u;
    VectorX<Scalar> sigma;
    MatrixX<Scalar> v;
    int n_b = 0;

    Eigen::Index n() const { return u.rows(); }
    Eigen::Index m() const { return u.cols(); }
    auto leading(int count) const { return u.leftCols(count); }
};

using SnapshotMatrixd = SnapshotMatrix<double>;
using PodBasisd = PodBasis<double>;

/// Flattens fields (row-major, x fastest) and scales every column to unit L2
/// norm, keeping input order. Throws NumericalError naming the index of a
/// zero-norm or non-finite snapshot.
template <typename Scalar = double>
SnapshotMatrix<Scalar> build_snapshot_matrix(std::span<const Field2D> fields, std::vector<double> labels) {
    if (fields.empty()) {
        throw ConfigError("snapshot matrix needs at least one field");
    }
    if (labels.size() != fields.size()) {
        throw ConfigError("snapshot matrix: " + std::to_string(labels.size()) + " labels for " +
                          std::to_string(fields.size()) + " fields");
    }
    require_finite(fields);
    const int nx = fields.front().nx();
    const int ny = fields.front().ny();
    SnapshotMatrix<Scalar> s;
    s.columns.resize(static_cast<Eigen::Index>(nx) * ny, static_cast<Eigen::Index>(fields.size()));
    for (std::size_t k = 0; k < fields.size(); ++k) {
        const Field2D &f = fields[k];
        if (f.nx() != nx || f.ny() != ny) {
            throw ConfigError("snapshot " + std::to_string(k) + " has grid " + std::to_string(f.nx()) + "x" +
                              std::to_string(f.ny()) + ", expected " + std::to_string(nx) + "x" +
                              std::to_string(ny));
        }
        const double norm = f.values().norm();
        if (!(norm > 0.0)) {
            throw NumericalError("snapshot " + std::to_string(k) + " has zero norm");
        }
        s.columns.col(static_cast<Eigen::Index>(k)) = (f.values() / norm).template cast<Scalar>();
    }
    std::set<double> seen;
    for (double l : labels) {
        if (!seen.insert(l).second) {
            s.warnings.push_back("duplicate snapshot label " + std::to_string(l));
        }
    }
    s.labels = std::move(labels);
    return s;
}

/// Index of the entry with largest magnitude; the lowest index wins ties.
template <typename Derived>
Eigen::Index dominant_index(const Eigen::MatrixBase<Derived> &x) {
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < x.size(); ++k) {
        if (std::abs(x[k]) > std::abs(x[best])) {
            best = k;
        }
    }
    return best;
}

/// Thin SVD with m singular triplets, sigma non-increasing, n_b set to m.
template <typename Scalar>
PodBasis<Scalar> pod_decompose(const SnapshotMatrix<Scalar> &s) {
    if (s.m() == 0 || s.n() == 0) {
        throw ConfigError("pod_decompose: empty snapshot matrix");
    }
    if (s.m() >= s.n()) {
        throw ConfigError("pod_decompose: snapshot count " + std::to_string(s.m()) +
                          " must be smaller than the grid size " + std::to_string(s.n()));
    }
    Eigen::JacobiSVD<MatrixX<Scalar>> svd(s.columns, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success || !svd.singularValues().allFinite()) {
        throw NumericalError("pod_decompose: SVD of the " + std::to_string(s.n()) + "x" + std::to_string(s.m()) +
                             " snapshot matrix failed");
    }
    PodBasis<Scalar> b;
    b.u = svd.matrixU();
    b.sigma = svd.singularValues();
    b.v = svd.matrixV();
    for (Eigen::Index i = 0; i < b.u.cols(); ++i) {
        if (b.u(dominant_index(b.u.col(i)), i) < Scalar(0)) {
            b.u.col(i) = -b.u.col(i);
            b.v.col(i) = -b.v.col(i);
        }
    }
    b.n_b = static_cast<int>(b.m());
    return b;
}

/// sqrt((1/m) * sum_{i > n_b} sigma_i^2), the mean projection residual of the
/// training snapshots when the first n_b bases are kept.
template <typename Derived>
typename Derived::Scalar proj_error_estimator(const Eigen::MatrixBase<Derived> &sigma, Eigen::Index m, int n_b) {
    using Scalar = typename Derived::Scalar;
    if (n_b < 1 || n_b > m || m > sigma.size()) {
        throw ConfigError("proj_error_estimator: need 1 <= n_b <= m <= len(sigma), got n_b=" + std::to_string(n_b) +
                          " m=" + std::to_string(m));
    }
    Scalar tail(0);
    for (Eigen::Index i = n_b; i < m; ++i) {
        tail += sigma[i] * sigma[i];
    }
    return std::sqrt(tail / static_cast<Scalar>(m));
}

/// Smallest n_b whose estimator is at or below threshold; m when none is.
template <typename Derived>
int select_nb(const Eigen::MatrixBase<Derived> &sigma, Eigen::Index m, double threshold) {
    if (threshold < 0.0) {
        throw ConfigError("select_nb: threshold must be non-negative");
    }
    for (int n_b = 1; n_b <= m; ++n_b) {
        if (proj_error_estimator(sigma, m, n_b) <= threshold) {
            return n_b;
        }
    }
    return static_cast<int>(m);
}

/// ||x - U_nb U_nb^T x||_2.
template <typename Scalar, typename Derived>
Scalar exact_projection_error(const Eigen::MatrixBase<Derived> &x, const PodBasis<Scalar> &basis, int n_b) {
    if (x.size() != basis.n()) {
        throw ConfigError("exact_projection_error: vector length " + std::to_string(x.size()) +
                          " does not match basis length " + std::to_string(basis.n()));
    }
    if (n_b < 0 || n_b > basis.m()) {
        throw ConfigError("exact_projection_error: n_b out of range");
    }
    const auto un = basis.leading(n_b);
    const VectorX<Scalar> coeffs = un.transpose() * x;
    return (x - un * coeffs).norm();
}

/// <u_i, x> for the first n_b bases.
template <typename Scalar, typename Derived>
VectorX<Scalar> pod_coefficients(const Eigen::MatrixBase<Derived> &x, const PodBasis<Scalar> &basis, int n_b) {
    return basis.leading(n_b).transpose() * x;
}

/// Binary artifact: "PODB" | u32 version = 1 | u32 n | u32 m | u32 n_b |
/// sigma (m f64) | u column-major (n*m f64) | v column-major (m*m f64).
void write_pod_basis(const PodBasisd &basis, const std::filesystem::path &path);
PodBasisd read_pod_basis(const std::filesystem::path &path);
std::vector<char> encode_pod_basis(const PodBasisd &basis);
PodBasisd decode_pod_basis(std::vector<char> bytes, const std::string &source = "<memory>");

}  // namespace podr

#endif  // PODR_POD_HPP
