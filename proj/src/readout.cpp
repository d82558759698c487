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

#include "podr/readout.hpp"

#include <unsupported/Eigen/FFT>
#include <algorithm>
#include <cmath>
#include <complex>

#include "podr/error.hpp"

namespace podr {

namespace {

constexpr double kNormTol = 1e-8;

void require_unit(const Eigen::VectorXd &v, const char *name) {
    const double dev = std::abs(v.norm() - 1.0);
    if (!(dev <= kNormTol)) {
        throw ConfigError(std::string(name) + " deviates from unit norm by " + std::to_string(dev));
    }
}

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

long long draw_binomial(long long n, double p, std::mt19937_64 &rng) {
    if (n <= 0 || p <= 0.0) {
        return 0;
    }
    if (p >= 1.0) {
        return n;
    }
    std::binomial_distribution<long long> dist(n, p);
    return dist(rng);
}

}  // namespace

std::string method_label(Method m) {
    switch (m) {
        case Method::PODR:
            return "PODR";
        case Method::RSR:
            return "RSR";
        case Method::FSR:
            return "FSR (idealized)";
    }
    return "?";
}

Method parse_method(const std::string &name) {
    if (name == "PODR") return Method::PODR;
    if (name == "RSR") return Method::RSR;
    if (name == "FSR") return Method::FSR;
    throw ConfigError("unknown readout method \"" + name + "\" (expected PODR, RSR or FSR)");
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

double hadamard_p0(const Eigen::VectorXd &x, const Eigen::VectorXd &u_tilde) {
    if (x.size() != u_tilde.size()) {
        throw ConfigError("hadamard_p0: lengths " + std::to_string(x.size()) + " and " +
                          std::to_string(u_tilde.size()) + " differ");
    }
    require_unit(x, "hadamard_p0: x");
    require_unit(u_tilde, "hadamard_p0: u~");
    return std::clamp(0.5 * (1.0 + x.dot(u_tilde)), 0.0, 1.0);
}

double sample_coefficient(double p0, long long shots, std::mt19937_64 &rng) {
    if (shots < 1) {
        throw ConfigError("sample_coefficient: shots must be positive");
    }
    if (!(p0 >= 0.0 && p0 <= 1.0)) {
        throw ConfigError("sample_coefficient: p0 outside [0, 1]");
    }
    const long long z0 = draw_binomial(shots, p0, rng);
    return 2.0 * static_cast<double>(z0) / static_cast<double>(shots) - 1.0;
}

double sample_coefficient(double p0, long long shots, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return sample_coefficient(p0, shots, rng);
}

ReadoutReport podr_readout(const Eigen::VectorXd &x, const PodBasisd &basis, const Eigen::MatrixXd &approximants,
                           long long n_shot_total, std::uint64_t seed, const PodrOptions &opts) {
    const int n_b = static_cast<int>(approximants.cols());
    if (n_b < 1 || n_b > basis.m() || approximants.rows() != basis.n()) {
        throw ConfigError("podr_readout: " + std::to_string(n_b) + " approximants of length " +
                          std::to_string(approximants.rows()) + " do not match a basis of " +
                          std::to_string(basis.m()) + " vectors of length " + std::to_string(basis.n()));
    }
    if (x.size() != basis.n()) {
        throw ConfigError("podr_readout: target length does not match the basis");
    }
    require_unit(x, "podr_readout: target");
    if (!opts.analytic && (n_shot_total < n_b || n_shot_total % n_b != 0)) {
        throw ConfigError("podr_readout: shot budget " + std::to_string(n_shot_total) +
                          " is not a positive multiple of n_b = " + std::to_string(n_b));
    }
    const long long per_basis = opts.analytic ? 0 : n_shot_total / n_b;

    ReadoutReport r;
    r.method = Method::PODR;
    r.n_shot_total = n_shot_total;
    r.n_b = n_b;
    r.seed = seed;
    r.beta = opts.beta;
    r.analytic = opts.analytic;
    r.estimates.resize(n_b);
    for (int i = 0; i < n_b; ++i) {
        const Eigen::VectorXd ut = approximants.col(i);
        if (opts.analytic) {
            r.estimates[i] = x.dot(ut);
        } else {
            std::mt19937_64 rng(stream_seed(seed, static_cast<std::uint64_t>(i)));
            r.estimates[i] = sample_coefficient(hadamard_p0(x, ut), per_basis, rng);
        }
    }

    const auto exact = basis.leading(n_b);
    const Eigen::VectorXd full = exact * r.estimates;
    if (opts.subregion) {
        const auto &idx = *opts.subregion;
        r.reconstruction.resize(static_cast<Eigen::Index>(idx.size()));
        Eigen::VectorXd truth(r.reconstruction.size());
        for (std::size_t k = 0; k < idx.size(); ++k) {
            if (idx[k] < 0 || idx[k] >= x.size()) {
                throw ConfigError("podr_readout: subregion index " + std::to_string(idx[k]) + " out of range");
            }
            r.reconstruction[static_cast<Eigen::Index>(k)] = full[idx[k]];
            truth[static_cast<Eigen::Index>(k)] = x[idx[k]];
        }
        r.epsilon = (truth - r.reconstruction).norm();
    } else {
        r.reconstruction = full;
        r.epsilon = (x - full).norm();
    }
    r.e_proj = exact_projection_error(x, basis, n_b);
    r.e_enc = (x.transpose() * (exact - approximants)).norm();
    r.e_sam_bound = opts.analytic ? 0.0 : opts.beta * std::sqrt(static_cast<double>(n_b) / per_basis);
    return r;
}

std::vector<long long> sample_multinomial(const Eigen::VectorXd &probs, long long shots, std::mt19937_64 &rng) {
    std::vector<long long> counts(static_cast<std::size_t>(probs.size()), 0);
    long long left = shots;
    double mass = probs.sum();
    for (Eigen::Index j = 0; j < probs.size() && left > 0; ++j) {
        const double p = probs[j];
        if (j + 1 == probs.size()) {
            counts[static_cast<std::size_t>(j)] = left;
            break;
        }
        const double q = mass > 0.0 ? std::clamp(p / mass, 0.0, 1.0) : 1.0;
        const long long c = draw_binomial(left, q, rng);
        counts[static_cast<std::size_t>(j)] = c;
        left -= c;
        mass -= p;
    }
    return counts;
}

ReadoutReport rsr_readout(const Eigen::VectorXd &x, long long n_shot_total, std::uint64_t seed, bool sign_oracle,
                          bool analytic) {
    require_unit(x, "rsr_readout: target");
    if (!analytic && n_shot_total < 1) {
        throw ConfigError("rsr_readout: shot budget must be positive");
    }
    ReadoutReport r;
    r.method = Method::RSR;
    r.n_shot_total = n_shot_total;
    r.seed = seed;
    r.analytic = analytic;
    const Eigen::VectorXd probs = x.array().square();
    if (analytic) {
        r.estimates = x.cwiseAbs();
    } else {
        std::mt19937_64 rng(stream_seed(seed, 0));
        const std::vector<long long> counts = sample_multinomial(probs, n_shot_total, rng);
        r.estimates.resize(x.size());
        for (Eigen::Index j = 0; j < x.size(); ++j) {
            r.estimates[j] = std::sqrt(static_cast<double>(counts[static_cast<std::size_t>(j)]) / n_shot_total);
        }
    }
    r.reconstruction = r.estimates;
    if (sign_oracle) {
        for (Eigen::Index j = 0; j < x.size(); ++j) {
            if (x[j] < 0.0) {
                r.reconstruction[j] = -r.reconstruction[j];
            }
        }
    }
    r.epsilon = (x - r.reconstruction).norm();
    return r;
}

Eigen::VectorXcd unitary_dft2(const Eigen::VectorXcd &x, int nx, int ny, bool inverse) {
    if (x.size() != static_cast<Eigen::Index>(nx) * ny) {
        throw ConfigError("unitary_dft2: vector length does not match " + std::to_string(nx) + "x" +
                          std::to_string(ny));
    }
    Eigen::FFT<double> fft;
    fft.SetFlag(Eigen::FFT<double>::Unscaled);
    Eigen::MatrixXcd grid = x.reshaped(nx, ny);
    Eigen::VectorXcd in;
    Eigen::VectorXcd out;
    for (int j = 0; j < ny; ++j) {
        in = grid.col(j);
        inverse ? fft.inv(out, in) : fft.fwd(out, in);
        grid.col(j) = out;
    }
    for (int i = 0; i < nx; ++i) {
        in = grid.row(i).transpose();
        inverse ? fft.inv(out, in) : fft.fwd(out, in);
        grid.row(i) = out.transpose();
    }
    return grid.reshaped() / std::sqrt(static_cast<double>(nx) * ny);
}

ReadoutReport fsr_readout(const Eigen::VectorXd &x, int nx, int ny, long long n_shot_total, double cutoff,
                          std::uint64_t seed, bool analytic) {
    require_unit(x, "fsr_readout: target");
    if (!(cutoff > 0.0 && cutoff < 1.0)) {
        throw ConfigError("fsr_readout: cutoff must lie in (0, 1)");
    }
    if (!analytic && n_shot_total < 1) {
        throw ConfigError("fsr_readout: shot budget must be positive");
    }
    const Eigen::VectorXcd spectrum = unitary_dft2(x.cast<std::complex<double>>(), nx, ny);
    const Eigen::VectorXd probs = spectrum.cwiseAbs2();

    Eigen::VectorXd p_hat;
    if (analytic) {
        p_hat = probs;
    } else {
        std::mt19937_64 rng(stream_seed(seed, 0));
        const std::vector<long long> counts = sample_multinomial(probs, n_shot_total, rng);
        p_hat.resize(probs.size());
        for (Eigen::Index k = 0; k < probs.size(); ++k) {
            p_hat[k] = static_cast<double>(counts[static_cast<std::size_t>(k)]) / n_shot_total;
        }
    }

    ReadoutReport r;
    r.method = Method::FSR;
    r.n_shot_total = n_shot_total;
    r.seed = seed;
    r.analytic = analytic;
    Eigen::VectorXcd kept = Eigen::VectorXcd::Zero(spectrum.size());
    std::vector<double> amplitudes;
    for (Eigen::Index k = 0; k < spectrum.size(); ++k) {
        if (p_hat[k] > cutoff) {
            const double a = std::sqrt(p_hat[k]);
            kept[k] = std::polar(a, std::arg(spectrum[k]));
            amplitudes.push_back(a);
        }
    }
    r.kept_modes = static_cast<int>(amplitudes.size());
    r.estimates = Eigen::Map<Eigen::VectorXd>(amplitudes.data(), static_cast<Eigen::Index>(amplitudes.size()));
    r.reconstruction = unitary_dft2(kept, nx, ny, true).real();
    r.epsilon = (x - r.reconstruction).norm();
    return r;
}

bool error_budget_check(const ReadoutReport &report, double beta) {
    if (report.method != Method::PODR) {
        throw ConfigError("error_budget_check applies to PODR reports only");
    }
    double bound = report.e_proj + report.e_enc;
    if (!report.analytic) {
        const double per_basis = static_cast<double>(report.n_shot_total / report.n_b);
        bound += beta * std::sqrt(report.n_b / per_basis);
    }
    return report.epsilon <= bound * (1.0 + 1e-12) + 1e-15;
}

}  // namespace podr
