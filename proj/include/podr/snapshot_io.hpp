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

#ifndef PODR_SNAPSHOT_IO_HPP
#define PODR_SNAPSHOT_IO_HPP

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "podr/field.hpp"

namespace podr {

// Snapshot file layout (little-endian):
//   "PODS" | u32 version = 1 | u32 count | u32 nx | u32 ny |
//   count * nx * ny float64, each snapshot row-major with x fastest.

std::vector<char> encode_snapshots(std::span<const Field2D> fields);
std::vector<Field2D> decode_snapshots(std::vector<char> bytes, const std::string &source = "<memory>");

/// Throws ConfigError if the fields do not share nx and ny.
void write_snapshot_file(std::span<const Field2D> fields, const std::filesystem::path &path);

/// Throws FormatError with kind BadMagic, BadVersion, Truncated or
/// DimensionMismatch; values are returned bit-for-bit as written.
std::vector<Field2D> read_snapshot_file(const std::filesystem::path &path);

/// One snapshot as text: ny lines of nx comma-separated values, the first
/// line holding y index 0. Values use 17 significant digits.
std::string field_to_csv(const Field2D &field);
void write_field_csv(const Field2D &field, const std::filesystem::path &path);

/// Parses the layout written by field_to_csv; every line must carry the same
/// number of columns.
Field2D field_from_csv(const std::string &text, const std::string &source = "<memory>");
Field2D read_field_csv(const std::filesystem::path &path);

}  // namespace podr

#endif  // PODR_SNAPSHOT_IO_HPP
