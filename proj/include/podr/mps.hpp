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

#ifndef PODR_MPS_HPP
#define PODR_MPS_HPP

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "podr/error.hpp"
#include "podr/field.hpp"
#include "podr/pod.hpp"

namespace podr {

/// Tensor-train (open-boundary MPS) form of a length-2^n real vector.
///
/// Core k is stored as a (left * 2) x right matrix whose row a + left * b
/// holds the slice for physical bit b; core 0 carries the least significant
/// bit of the vector index. All cores but the last are left-orthonormal, and
/// the last is scaled so the contraction has unit norm. `dense` caches the
/// contraction.
template <typename Scalar>
struct MpsVector {
    int n_qubits = 0;
    int chi_max = 1;
    std::vector<MatrixX<Scalar>> cores;
    VectorX<Scalar> dense;

    int left_bond(int k) const { return static_cast<int>(cores[k].rows() / 2); }
    int right_bond(int k) const { return static_cast<int>(cores[k].cols()); }
    /// Bond dimensions at the n-1 internal cuts.
    std::vector<int> bonds() const {
        std::vector<int> b;
        for (int k = 0; k + 1 < n_qubits; ++k) {
            b.push_back(right_bond(k));
        }
        return b;
    }
    int max_bond() const {
        const std::vector<int> b = bonds();
        return b.empty() ? 1 : *std::max_element(b.begin(), b.end());
    }
};

using MpsVectord = MpsVector<double>;

/// Per-basis maximum bond dimensions (each a power of two) and the encoding
/// estimator they achieve.
struct BondPlan {
    std::vector<int> chis;
    double estimated_error = 0.0;
};

/// Raised when no bond plan up to the cap meets the threshold.
class UnreachableThreshold : public NumericalError {
   public:
    UnreachableThreshold(const std::string &what, double best) : NumericalError(what), best_(best) {}
    double best_achieved() const noexcept { return best_; }

   private:
    double best_;
};

/// Smallest power of two >= chi.
inline int effective_bond(int chi) {
    int e = 1;
    while (e < chi) {
        e *= 2;
    }
    return e;
}

/// Dense left-to-right product of the cores, unnormalised.
template <typename Scalar>
VectorX<Scalar> contract_cores(const std::vector<MatrixX<Scalar>> &cores) {
    if (cores.empty()) {
        return {};
    }
    MatrixX<Scalar> acc = cores.front();
    Eigen::Index len = 2;
    for (std::size_t k = 1; k < cores.size(); ++k) {
        const MatrixX<Scalar> &c = cores[k];
        const Eigen::Index left = c.rows() / 2;
        MatrixX<Scalar> next(2 * len, c.cols());
        for (int b = 0; b < 2; ++b) {
            next.middleRows(b * len, len).noalias() = acc * c.middleRows(b * left, left);
        }
        acc.swap(next);
        len *= 2;
    }
    return acc.col(0);
}

/// Dense unit-norm vector represented by `m`; served from the cache when filled.
template <typename Scalar>
VectorX<Scalar> contract(const MpsVector<Scalar> &m) {
    if (m.dense.size() == (Eigen::Index(1) << m.n_qubits)) {
        return m.dense;
    }
    return contract_cores(m.cores);
}

/// Left-to-right TT-SVD with every bond truncated to at most chi_max.
///
/// At each cut the remainder is reshaped to (left * 2) x rest and split by a
/// thin SVD; the leading singular directions in routine order are kept, and
/// directions whose singular value is below 1e-13 of the largest are dropped.
/// The result is renormalised to unit L2 norm.
template <typename Derived>
MpsVector<typename Derived::Scalar> tt_svd(const Eigen::MatrixBase<Derived> &x, int chi_max) {
    using Scalar = typename Derived::Scalar;
    if (!is_power_of_two(x.size()) || x.size() < 2) {
        throw ConfigError("tt_svd: vector length " + std::to_string(x.size()) + " is not a power of two >= 2");
    }
    if (chi_max < 1) {
        throw ConfigError("tt_svd: chi_max must be positive");
    }
    const Scalar norm = x.norm();
    if (!(norm > Scalar(0))) {
        throw NumericalError("tt_svd: zero vector");
    }
    MpsVector<Scalar> out;
    out.n_qubits = log2_exact(x.size());
    out.chi_max = chi_max;

    VectorX<Scalar> flat = x / norm;
    MatrixX<Scalar> rest = flat.reshaped(2, flat.size() / 2);
    for (int k = 0; k + 1 < out.n_qubits; ++k) {
        Eigen::BDCSVD<MatrixX<Scalar>> svd(rest, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const auto &s = svd.singularValues();
        Eigen::Index keep = std::min<Eigen::Index>(chi_max, s.size());
        const Scalar floor = s.size() > 0 ? s[0] * Scalar(1e-13) : Scalar(0);
        while (keep > 1 && !(s[keep - 1] > floor)) {
            --keep;
        }
        out.cores.push_back(svd.matrixU().leftCols(keep));
        const MatrixX<Scalar> carry = s.head(keep).asDiagonal() * svd.matrixV().leftCols(keep).transpose();
        rest = carry.reshaped(keep * 2, carry.size() / (keep * 2));
    }
    out.cores.push_back(rest);
    const Scalar last = out.cores.back().norm();
    if (!(last > Scalar(0))) {
        throw NumericalError("tt_svd: truncation removed the whole vector");
    }
    out.cores.back() /= last;
    out.dense = contract_cores(out.cores);
    return out;
}

/// Encoding-error estimator
///   sqrt( sum_i | s_i - sum_j s_j <u~_i, u_j> |^2 ),  s_i = sigma_i^2 / M,
/// over the first k = approximants.cols() bases, M = basis.m().
template <typename Scalar, typename Derived>
Scalar enc_error_estimator(const PodBasis<Scalar> &basis, const Eigen::MatrixBase<Derived> &approximants) {
    const Eigen::Index k = approximants.cols();
    if (approximants.rows() != basis.n() || k > basis.m()) {
        throw ConfigError("enc_error_estimator: approximants are " + std::to_string(approximants.rows()) + "x" +
                          std::to_string(k) + ", basis is " + std::to_string(basis.n()) + "x" +
                          std::to_string(basis.m()));
    }
    const VectorX<Scalar> weight = basis.sigma.head(k).array().square() / static_cast<Scalar>(basis.m());
    const MatrixX<Scalar> overlap = approximants.transpose() * basis.leading(static_cast<int>(k));
    return (weight - overlap * weight).norm();
}

template <typename Scalar>
MatrixX<Scalar> dense_columns(const std::vector<MpsVector<Scalar>> &mps) {
    if (mps.empty()) {
        return {};
    }
    MatrixX<Scalar> out(Eigen::Index(1) << mps.front().n_qubits, static_cast<Eigen::Index>(mps.size()));
    for (std::size_t i = 0; i < mps.size(); ++i) {
        const VectorX<Scalar> d = contract(mps[i]);
        if (d.size() != out.rows()) {
            throw ConfigError("approximant " + std::to_string(i) + " has a different length");
        }
        out.col(static_cast<Eigen::Index>(i)) = d;
    }
    return out;
}

template <typename Scalar>
Scalar enc_error_estimator(const PodBasis<Scalar> &basis, const std::vector<MpsVector<Scalar>> &approximants) {
    return enc_error_estimator(basis, dense_columns(approximants));
}

/// |<x, u_i - u~_i>| for one basis.
template <typename Derived, typename Scalar>
Scalar basis_encoding_error(const Eigen::MatrixBase<Derived> &x, const PodBasis<Scalar> &basis, int i,
                            const MpsVector<Scalar> &approx) {
    return std::abs(x.dot(basis.u.col(i) - contract(approx)));
}

template <typename Scalar>
struct BondSearchResult {
    BondPlan plan;
    std::vector<MpsVector<Scalar>> approximants;
};

/// Greedy power-of-two bond search over the first basis.n_b bases.
///
/// Starts with every chi at 1 and repeatedly doubles the single chi whose
/// doubling gives the smallest estimator (lowest basis index on ties) until
/// the estimator is at or below `threshold`. Throws UnreachableThreshold with
/// the best estimator once every chi sits at chi_cap.
template <typename Scalar>
BondSearchResult<Scalar> search_bond_plan(const PodBasis<Scalar> &basis, double threshold, int chi_cap) {
    const int n_b = basis.n_b;
    if (n_b < 1 || n_b > basis.m()) {
        throw ConfigError("search_bond_plan: basis has no selected bases");
    }
    if (threshold < 0.0) {
        throw ConfigError("search_bond_plan: threshold must be non-negative");
    }
    const int n = log2_exact(basis.n());
    if (!is_power_of_two(chi_cap) || chi_cap > (1 << (n / 2))) {
        throw ConfigError("search_bond_plan: chi_cap " + std::to_string(chi_cap) +
                          " must be a power of two no larger than " + std::to_string(1 << (n / 2)));
    }

    const VectorX<Scalar> weight = basis.sigma.head(n_b).array().square() / static_cast<Scalar>(basis.m());
    const auto lead = basis.leading(n_b);

    // Compressions and overlap rows <u~_i, U_nb> per (basis, chi).
    std::map<std::pair<int, int>, std::pair<MpsVector<Scalar>, VectorX<Scalar>>> cache;
    auto entry = [&](int i, int chi) -> const std::pair<MpsVector<Scalar>, VectorX<Scalar>> & {
        auto it = cache.find({i, chi});
        if (it == cache.end()) {
            MpsVector<Scalar> m = tt_svd(basis.u.col(i), chi);
            VectorX<Scalar> row = lead.transpose() * m.dense;
            it = cache.emplace(std::make_pair(i, chi), std::make_pair(std::move(m), std::move(row))).first;
        }
        return it->second;
    };

    std::vector<int> chis(n_b, 1);
    MatrixX<Scalar> overlap(n_b, n_b);
    for (int i = 0; i < n_b; ++i) {
        overlap.row(i) = entry(i, 1).second.transpose();
    }
    auto estimate = [&](const MatrixX<Scalar> &g) { return static_cast<double>((weight - g * weight).norm()); };
    double current = estimate(overlap);

    while (!(current <= threshold)) {
        int best_i = -1;
        double best = 0.0;
        for (int i = 0; i < n_b; ++i) {
            if (chis[i] >= chi_cap) {
                continue;
            }
            MatrixX<Scalar> trial = overlap;
            trial.row(i) = entry(i, 2 * chis[i]).second.transpose();
            const double e = estimate(trial);
            if (best_i < 0 || e < best) {
                best_i = i;
                best = e;
            }
        }
        if (best_i < 0) {
            throw UnreachableThreshold("search_bond_plan: estimator " + std::to_string(current) +
                                           " exceeds threshold " + std::to_string(threshold) +
                                           " with every chi at the cap " + std::to_string(chi_cap),
                                       current);
        }
        chis[best_i] *= 2;
        overlap.row(best_i) = entry(best_i, chis[best_i]).second.transpose();
        current = best;
    }

    BondSearchResult<Scalar> out;
    out.plan.chis = chis;
    out.plan.estimated_error = current;
    for (int i = 0; i < n_b; ++i) {
        out.approximants.push_back(entry(i, chis[i]).first);
    }
    return out;
}

/// Binary artifact: "PODM" | u32 version = 1 | u32 n_qubits | u32 core count |
/// per core: u32 left | u32 right | (left*2*right) f64, column-major over the
/// (left*2) x right matrix (element (a, b, r) at a + left*b + 2*left*r).
std::vector<char> encode_mps(const MpsVectord &m);
MpsVectord decode_mps(std::vector<char> bytes, const std::string &source = "<memory>");
void write_mps(const MpsVectord &m, const std::filesystem::path &path);
MpsVectord read_mps(const std::filesystem::path &path);

}  // namespace podr

#endif  // PODR_MPS_HPP
