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

#ifndef PODR_BINARY_IO_HPP
#define PODR_BINARY_IO_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace podr::io {

/// Little-endian byte sink for the artifact formats.
class ByteWriter {
   public:
    void magic(std::string_view four);
    void u32(std::uint32_t v);
    void f64(double v);
    template <typename Range>
    void f64_all(const Range &r) {
        for (double v : r) {
            f64(v);
        }
    }
    const std::vector<char> &bytes() const noexcept { return buf_; }

   private:
    std::vector<char> buf_;
};

/// Bounds-checked little-endian reader; underflow raises FormatError(Truncated).
class ByteReader {
   public:
    ByteReader(std::vector<char> bytes, std::string source);

    /// Raises FormatError(BadMagic) on mismatch.
    void expect_magic(std::string_view four);
    /// Raises FormatError(BadVersion) unless the stored version equals `version`.
    void expect_version(std::uint32_t version);
    std::uint32_t u32();
    double f64();
    std::size_t remaining() const noexcept { return bytes_.size() - pos_; }
    const std::string &source() const noexcept { return source_; }
    void require(std::size_t n, const char *what) const;

   private:
    std::vector<char> bytes_;
    std::size_t pos_ = 0;
    std::string source_;
};

std::vector<char> read_file(const std::filesystem::path &path);

/// Writes to a sibling temporary file and renames it over `path`.
void atomic_write(const std::filesystem::path &path, const std::vector<char> &bytes);
void atomic_write(const std::filesystem::path &path, std::string_view text);

/// Shortest decimal that round-trips: 17 significant digits.
std::string format_double(double v);

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(const void *data, std::size_t size);
std::string sha256_hex(std::string_view text);
std::string sha256_file(const std::filesystem::path &path);

}  // namespace podr::io

#endif  // PODR_BINARY_IO_HPP
