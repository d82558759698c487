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

#ifndef PODR_CIRCUIT_HPP
#define PODR_CIRCUIT_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "podr/mps.hpp"

namespace podr {

/// One unitary of the sequential preparation circuit.
struct LayoutBlock {
    int core = 0;
    /// Contiguous, ascending qubit indices; qubit k carries bit k of the index.
    std::vector<int> qubits;
};

/// Sequential (staircase) preparation circuit of a left-canonical MPS.
///
/// Core k becomes a unitary on its physical qubit k and the ceil(log2 l_k)
/// qubits below it that hold the incoming bond l_k, so its width is
/// ceil(log2 l_k) + 1. Blocks are listed in application order, from the last
/// core (which prepares the bond state) down to core 0. Consecutive blocks
/// share ceil(log2 bond) qubits and their union is the whole register.
std::vector<LayoutBlock> staircase_layout(const MpsVectord &m);

/// Same layout from the n-1 internal bond dimensions alone.
std::vector<LayoutBlock> staircase_layout(const std::vector<int> &bonds);

/// Bond profile min(chi, 2^k, 2^(n-k)) at cuts k = 1 .. n-1, the generic
/// outcome of truncating a dense vector at chi.
std::vector<int> capped_bonds(int n_qubits, int chi);

struct CircuitCost {
    int n_qubits = 0;
    /// Width of the block for each core, indexed by core.
    std::vector<int> per_core_qubit_counts;
    std::int64_t two_qubit_gate_count = 0;
    std::int64_t depth = 0;
};

/// CNOTs charged for a generic m-qubit unitary: 0 for m = 1, 3 for m = 2 and
/// ceil(3/4 (4^m - 2^m)) beyond.
std::int64_t two_qubit_gates_for_block(int m);

/// Layers charged for one block: each CNOT layer carries three single-qubit
/// layers, plus three for a closing single-qubit rotation.
std::int64_t block_depth(int m);

/// Blocks overlap on shared qubits, so their depths add serially.
CircuitCost cost_model(const std::vector<LayoutBlock> &layout);

/// One row of the depth-versus-grid-size table.
struct DepthRow {
    long long grid_size = 0;
    std::string component;
    int n_b = 0;
    std::vector<int> chis;
    std::int64_t two_qubit_gates = 0;
    std::int64_t depth = 0;
};

}  // namespace podr

#endif  // PODR_CIRCUIT_HPP
