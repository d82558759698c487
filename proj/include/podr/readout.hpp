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

#ifndef PODR_READOUT_HPP
#define PODR_READOUT_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "podr/pod.hpp"

namespace podr {

enum class Method { PODR, RSR, FSR };

/// Display label; the Fourier baseline is reported as "FSR (idealized)".
std::string method_label(Method m);
/// Accepts "PODR", "RSR", "FSR" (case-sensitive). Throws ConfigError otherwise.
Method parse_method(const std::string &name);

struct ReadoutReport {
    Method method = Method::PODR;
    long long n_shot_total = 0;
    /// c~_i for PODR, |x~_j| for RSR, kept spectral amplitudes for FSR.
    Eigen::VectorXd estimates;
    Eigen::VectorXd reconstruction;
    double epsilon = 0.0;
    int n_b = 0;
    double e_proj = 0.0;
    double e_enc = 0.0;
    double e_sam_bound = 0.0;
    double beta = 2.0;
    int kept_modes = 0;
    std::uint64_t seed = 0;
    bool analytic = false;
};

/// Seed of the independent stream `index` derived from `seed`.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index);

/// Ancilla zero-outcome probability (1 + <x, u~>) / 2 of the Hadamard test.
/// Throws ConfigError if either vector is off unit norm by more than 1e-8.
double hadamard_p0(const Eigen::VectorXd &x, const Eigen::VectorXd &u_tilde);

/// 2 Z0 / shots - 1 with Z0 ~ Binomial(shots, p0).
double sample_coefficient(double p0, long long shots, std::mt19937_64 &rng);
double sample_coefficient(double p0, long long shots, std::uint64_t seed);

struct PodrOptions {
    double beta = 2.0;
    /// Use the exact overlaps in place of sampled estimates.
    bool analytic = false;
    /// Restrict reconstruction and error to these indices.
    std::optional<std::vector<Eigen::Index>> subregion;
};

/// Hadamard-test readout of the first approximants.cols() POD coefficients.
///
/// The shot budget is split equally across the bases; basis i samples from
/// stream_seed(seed, i). Coefficients are measured against the compressed
/// bases and the field is rebuilt with the exact ones.
ReadoutReport podr_readout(const Eigen::VectorXd &x, const PodBasisd &basis, const Eigen::MatrixXd &approximants,
                           long long n_shot_total, std::uint64_t seed, const PodrOptions &opts = {});

/// Multinomial draw of `shots` outcomes from `probs` by sequential binomial
/// splitting.
std::vector<long long> sample_multinomial(const Eigen::VectorXd &probs, long long shots, std::mt19937_64 &rng);

/// Computational-basis sampling: |x~_j| = sqrt(count_j / shots). With
/// sign_oracle the signs are copied from x, otherwise all are positive.
ReadoutReport rsr_readout(const Eigen::VectorXd &x, long long n_shot_total, std::uint64_t seed,
                          bool sign_oracle = true, bool analytic = false);

/// Idealized Fourier-space readout on an nx-by-ny grid. Outcomes are sampled
/// from the power spectrum of the unitary 2D DFT; modes whose estimated
/// probability exceeds `cutoff` keep amplitude sqrt(p^) with the exact phase,
/// the rest are dropped, and the real part of the inverse transform is the
/// reconstruction.
ReadoutReport fsr_readout(const Eigen::VectorXd &x, int nx, int ny, long long n_shot_total, double cutoff,
                          std::uint64_t seed, bool analytic = false);

/// Unitary 2D DFT of a row-major (x fastest) nx-by-ny grid and its inverse.
Eigen::VectorXcd unitary_dft2(const Eigen::VectorXcd &x, int nx, int ny, bool inverse = false);

/// epsilon <= E_proj + E_enc + beta sqrt(n_b / shots per basis).
bool error_budget_check(const ReadoutReport &report, double beta);

}  // namespace podr

#endif  // PODR_READOUT_HPP
