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

#include "podr/circuit.hpp"

#include <algorithm>

namespace podr {

namespace {

int ceil_log2(int v) {
    int bits = 0;
    while ((1 << bits) < v) {
        ++bits;
    }
    return bits;
}

}  // namespace

std::vector<LayoutBlock> staircase_layout(const std::vector<int> &bonds) {
    const int n = static_cast<int>(bonds.size()) + 1;
    std::vector<LayoutBlock> blocks;
    blocks.reserve(n);
    for (int k = n - 1; k >= 0; --k) {
        const int left = k == 0 ? 1 : bonds[k - 1];
        if (left < 1) {
            throw ConfigError("staircase_layout: bond " + std::to_string(k) + " is not positive");
        }
        const int reach = std::min(ceil_log2(left), k);
        LayoutBlock b;
        b.core = k;
        for (int q = k - reach; q <= k; ++q) {
            b.qubits.push_back(q);
        }
        blocks.push_back(std::move(b));
    }
    return blocks;
}

std::vector<LayoutBlock> staircase_layout(const MpsVectord &m) { return staircase_layout(m.bonds()); }

std::vector<int> capped_bonds(int n_qubits, int chi) {
    std::vector<int> bonds;
    for (int k = 1; k < n_qubits; ++k) {
        const int side = std::min(k, n_qubits - k);
        bonds.push_back(side >= 30 ? chi : std::min(chi, 1 << side));
    }
    return bonds;
}

std::int64_t two_qubit_gates_for_block(int m) {
    if (m <= 1) {
        return 0;
    }
    if (m == 2) {
        return 3;
    }
    const std::int64_t span = (std::int64_t{1} << (2 * m)) - (std::int64_t{1} << m);
    return (3 * span + 3) / 4;
}

std::int64_t block_depth(int m) { return 4 * two_qubit_gates_for_block(m) + 3; }

CircuitCost cost_model(const std::vector<LayoutBlock> &layout) {
    CircuitCost c;
    c.n_qubits = static_cast<int>(layout.size());
    c.per_core_qubit_counts.assign(layout.size(), 0);
    for (const LayoutBlock &b : layout) {
        const int m = static_cast<int>(b.qubits.size());
        c.per_core_qubit_counts.at(b.core) = m;
        c.two_qubit_gate_count += two_qubit_gates_for_block(m);
        c.depth += block_depth(m);
    }
    return c;
}

}  // namespace podr
