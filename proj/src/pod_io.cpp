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

#include "podr/binary_io.hpp"
#include "podr/pod.hpp"

namespace podr {

namespace {
constexpr std::string_view kMagic = "PODB";
constexpr std::uint32_t kVersion = 1;
}  // namespace

std::vector<char> encode_pod_basis(const PodBasisd &basis) {
    io::ByteWriter w;
    w.magic(kMagic);
    w.u32(kVersion);
    w.u32(static_cast<std::uint32_t>(basis.n()));
    w.u32(static_cast<std::uint32_t>(basis.m()));
    w.u32(static_cast<std::uint32_t>(basis.n_b));
    w.f64_all(basis.sigma);
    w.f64_all(basis.u.reshaped());
    w.f64_all(basis.v.reshaped());
    return w.bytes();
}

PodBasisd decode_pod_basis(std::vector<char> bytes, const std::string &source) {
    io::ByteReader r(std::move(bytes), source);
    r.expect_magic(kMagic);
    r.expect_version(kVersion);
    const Eigen::Index n = r.u32();
    const Eigen::Index m = r.u32();
    const int n_b = static_cast<int>(r.u32());
    if (n_b > m || m > n) {
        throw FormatError(FormatError::Kind::DimensionMismatch, source + ": inconsistent header n=" +
                                                                    std::to_string(n) + " m=" + std::to_string(m) +
                                                                    " n_b=" + std::to_string(n_b));
    }
    const std::size_t need = static_cast<std::size_t>(m + n * m + m * m) * sizeof(double);
    r.require(need, "basis payload");
    if (r.remaining() != need) {
        throw FormatError(FormatError::Kind::DimensionMismatch, source + ": trailing bytes after basis payload");
    }
    PodBasisd b;
    b.n_b = n_b;
    b.sigma.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        b.sigma[i] = r.f64();
    }
    b.u.resize(n, m);
    for (double &x : b.u.reshaped()) {
        x = r.f64();
    }
    b.v.resize(m, m);
    for (double &x : b.v.reshaped()) {
        x = r.f64();
    }
    return b;
}

void write_pod_basis(const PodBasisd &basis, const std::filesystem::path &path) {
    io::atomic_write(path, encode_pod_basis(basis));
}

PodBasisd read_pod_basis(const std::filesystem::path &path) {
    return decode_pod_basis(io::read_file(path), path.string());
}

}  // namespace podr
