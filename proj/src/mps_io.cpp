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
#include "podr/mps.hpp"

namespace podr {

namespace {
constexpr std::string_view kMagic = "PODM";
constexpr std::uint32_t kVersion = 1;
}  // namespace

std::vector<char> encode_mps(const MpsVectord &m) {
    io::ByteWriter w;
    w.magic(kMagic);
    w.u32(kVersion);
    w.u32(static_cast<std::uint32_t>(m.n_qubits));
    w.u32(static_cast<std::uint32_t>(m.cores.size()));
    for (std::size_t k = 0; k < m.cores.size(); ++k) {
        w.u32(static_cast<std::uint32_t>(m.left_bond(static_cast<int>(k))));
        w.u32(static_cast<std::uint32_t>(m.right_bond(static_cast<int>(k))));
        w.f64_all(m.cores[k].reshaped());
    }
    return w.bytes();
}

MpsVectord decode_mps(std::vector<char> bytes, const std::string &source) {
    io::ByteReader r(std::move(bytes), source);
    r.expect_magic(kMagic);
    r.expect_version(kVersion);
    MpsVectord m;
    m.n_qubits = static_cast<int>(r.u32());
    const std::uint32_t count = r.u32();
    if (count != static_cast<std::uint32_t>(m.n_qubits) || m.n_qubits < 1 || m.n_qubits > 30) {
        throw FormatError(FormatError::Kind::DimensionMismatch,
                          source + ": core count " + std::to_string(count) + " does not match " +
                              std::to_string(m.n_qubits) + " qubits");
    }
    std::uint32_t prev_right = 1;
    for (std::uint32_t k = 0; k < count; ++k) {
        const std::uint32_t left = r.u32();
        const std::uint32_t right = r.u32();
        const bool last = k + 1 == count;
        if (left != prev_right || left == 0 || right == 0 || (last && right != 1)) {
            throw FormatError(FormatError::Kind::DimensionMismatch,
                              source + ": core " + std::to_string(k) + " has bonds (" + std::to_string(left) +
                                  ", " + std::to_string(right) + ") that do not chain");
        }
        r.require(static_cast<std::size_t>(left) * 2 * right * sizeof(double), "core payload");
        Eigen::MatrixXd core(2 * left, right);
        for (double &x : core.reshaped()) {
            x = r.f64();
        }
        m.cores.push_back(std::move(core));
        prev_right = right;
    }
    if (r.remaining() != 0) {
        throw FormatError(FormatError::Kind::DimensionMismatch, source + ": trailing bytes after last core");
    }
    m.chi_max = m.max_bond();
    m.dense = contract_cores(m.cores);
    return m;
}

void write_mps(const MpsVectord &m, const std::filesystem::path &path) { io::atomic_write(path, encode_mps(m)); }

MpsVectord read_mps(const std::filesystem::path &path) { return decode_mps(io::read_file(path), path.string()); }

}  // namespace podr
