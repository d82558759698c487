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

#include "podr/snapshot_io.hpp"

#include <cerrno>
#include <cstdlib>
#include <sstream>

#include "podr/binary_io.hpp"
#include "podr/error.hpp"

namespace podr {

namespace {
constexpr std::string_view kMagic = "PODS";
constexpr std::uint32_t kVersion = 1;
}  // namespace

std::vector<char> encode_snapshots(std::span<const Field2D> fields) {
    const int nx = fields.empty() ? 0 : fields.front().nx();
    const int ny = fields.empty() ? 0 : fields.front().ny();
    for (std::size_t k = 0; k < fields.size(); ++k) {
        if (fields[k].nx() != nx || fields[k].ny() != ny) {
            throw ConfigError("snapshot " + std::to_string(k) + " is " + std::to_string(fields[k].nx()) + "x" +
                              std::to_string(fields[k].ny()) + ", expected " + std::to_string(nx) + "x" +
                              std::to_string(ny));
        }
    }
    io::ByteWriter w;
    w.magic(kMagic);
    w.u32(kVersion);
    w.u32(static_cast<std::uint32_t>(fields.size()));
    w.u32(static_cast<std::uint32_t>(nx));
    w.u32(static_cast<std::uint32_t>(ny));
    for (const Field2D &f : fields) {
        w.f64_all(f.values());
    }
    return w.bytes();
}

std::vector<Field2D> decode_snapshots(std::vector<char> bytes, const std::string &source) {
    io::ByteReader r(std::move(bytes), source);
    r.expect_magic(kMagic);
    r.expect_version(kVersion);
    const std::uint32_t count = r.u32();
    const std::uint32_t nx = r.u32();
    const std::uint32_t ny = r.u32();
    if (count > 0 && (nx == 0 || ny == 0)) {
        throw FormatError(FormatError::Kind::DimensionMismatch, source + ": zero grid dimension");
    }
    const std::size_t per = static_cast<std::size_t>(nx) * ny;
    const std::size_t expected = per * count * sizeof(double);
    r.require(expected, "snapshot payload");
    if (r.remaining() != expected) {
        throw FormatError(FormatError::Kind::DimensionMismatch,
                          source + ": header declares " + std::to_string(count) + " snapshots of " +
                              std::to_string(nx) + "x" + std::to_string(ny) + " but payload has " +
                              std::to_string(r.remaining()) + " bytes");
    }
    std::vector<Field2D> out;
    out.reserve(count);
    for (std::uint32_t k = 0; k < count; ++k) {
        Eigen::VectorXd v(static_cast<Eigen::Index>(per));
        for (std::size_t p = 0; p < per; ++p) {
            v[static_cast<Eigen::Index>(p)] = r.f64();
        }
        out.emplace_back(static_cast<int>(nx), static_cast<int>(ny), std::move(v));
    }
    return out;
}

void write_snapshot_file(std::span<const Field2D> fields, const std::filesystem::path &path) {
    io::atomic_write(path, encode_snapshots(fields));
}

std::vector<Field2D> read_snapshot_file(const std::filesystem::path &path) {
    return decode_snapshots(io::read_file(path), path.string());
}

std::string field_to_csv(const Field2D &field) {
    std::string out;
    out.reserve(field.size() * 24);
    for (int j = 0; j < field.ny(); ++j) {
        for (int i = 0; i < field.nx(); ++i) {
            if (i > 0) {
                out.push_back(',');
            }
            out += io::format_double(field(i, j));
        }
        out.push_back('\n');
    }
    return out;
}

void write_field_csv(const Field2D &field, const std::filesystem::path &path) {
    io::atomic_write(path, field_to_csv(field));
}

Field2D field_from_csv(const std::string &text, const std::string &source) {
    std::vector<double> values;
    int nx = -1;
    int ny = 0;
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.find_first_not_of(" \t") == std::string::npos) {
            continue;
        }
        int cols = 0;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            const std::string cell = line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
            char *end = nullptr;
            errno = 0;
            const double v = std::strtod(cell.c_str(), &end);
            while (end && (*end == ' ' || *end == '\t')) {
                ++end;
            }
            if (end == cell.c_str() || (end && *end != '\0') || errno == ERANGE) {
                throw FormatError(FormatError::Kind::Parse, source + ": line " + std::to_string(ny + 1) +
                                                                ": cannot parse \"" + cell + "\"");
            }
            values.push_back(v);
            ++cols;
            if (comma == std::string::npos) {
                break;
            }
            start = comma + 1;
        }
        if (nx < 0) {
            nx = cols;
        } else if (cols != nx) {
            throw FormatError(FormatError::Kind::DimensionMismatch, source + ": line " + std::to_string(ny + 1) +
                                                                        " has " + std::to_string(cols) +
                                                                        " columns, expected " + std::to_string(nx));
        }
        ++ny;
    }
    if (ny == 0) {
        throw FormatError(FormatError::Kind::Truncated, source + ": empty CSV snapshot");
    }
    return Field2D(nx, ny, Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size())));
}

Field2D read_field_csv(const std::filesystem::path &path) {
    const std::vector<char> bytes = io::read_file(path);
    return field_from_csv(std::string(bytes.begin(), bytes.end()), path.string());
}

}  // namespace podr
