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

#ifndef PODR_STREAM_HPP
#define PODR_STREAM_HPP

#include "podr/field.hpp"

namespace podr {

/// Streamfunction from u_x alone: cumulative trapezoid in y, column by
/// column, starting from psi = 0 on the bottom row. Valid when the bottom
/// boundary carries no normal flow.
Field2D stream_function(const Field2D &ux);

/// Max over interior nodes of |d psi/dx + u_y| with a central difference in x.
double max_stream_consistency_error(const Field2D &psi, const Field2D &uy);

}  // namespace podr

#endif  // PODR_STREAM_HPP
