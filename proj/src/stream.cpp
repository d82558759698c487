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

#include "podr/stream.hpp"

#include <algorithm>
#include <cmath>

#include "podr/error.hpp"

namespace podr {

Field2D stream_function(const Field2D &ux) {
    Field2D psi(ux.nx(), ux.ny());
    const double h = ux.hy();
    for (int i = 0; i < ux.nx(); ++i) {
        psi(i, 0) = 0.0;
        for (int j = 1; j < ux.ny(); ++j) {
            psi(i, j) = psi(i, j - 1) + 0.5 * h * (ux(i, j - 1) + ux(i, j));
        }
    }
    return psi;
}

double max_stream_consistency_error(const Field2D &psi, const Field2D &uy) {
    if (psi.nx() != uy.nx() || psi.ny() != uy.ny()) {
        throw ConfigError("max_stream_consistency_error: grid mismatch");
    }
    const double inv = 1.0 / (2.0 * psi.hx());
    double worst = 0.0;
    for (int j = 1; j + 1 < psi.ny(); ++j) {
        for (int i = 1; i + 1 < psi.nx(); ++i) {
            const double dpsi = (psi(i + 1, j) - psi(i - 1, j)) * inv;
            worst = std::max(worst, std::abs(dpsi + uy(i, j)));
        }
    }
    return worst;
}

}  // namespace podr
