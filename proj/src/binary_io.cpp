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

#include <openssl/evp.h>

#include <algorithm>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>

#include "podr/error.hpp"

namespace podr::io {

void ByteWriter::magic(std::string_view four) { buf_.insert(buf_.end(), four.begin(), four.end()); }

void ByteWriter::u32(std::uint32_t v) {
    for (int k = 0; k < 4; ++k) {
        buf_.push_back(static_cast<char>((v >> (8 * k)) & 0xFFu));
    }
}

void ByteWriter::f64(double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int k = 0; k < 8; ++k) {
        buf_.push_back(static_cast<char>((bits >> (8 * k)) & 0xFFu));
    }
}

ByteReader::ByteReader(std::vector<char> bytes, std::string source)
    : bytes_(std::move(bytes)), source_(std::move(source)) {}

void ByteReader::require(std::size_t n, const char *what) const {
    if (remaining() < n) {
        throw FormatError(FormatError::Kind::Truncated, source_ + ": truncated payload while reading " + what +
                                                            " (need " + std::to_string(n) + " bytes, have " +
                                                            std::to_string(remaining()) + ")");
    }
}

void ByteReader::expect_magic(std::string_view four) {
    const std::size_t have = std::min(remaining(), four.size());
    const bool prefix_ok = std::memcmp(bytes_.data() + pos_, four.data(), have) == 0;
    if (prefix_ok && have < four.size()) {
        throw FormatError(FormatError::Kind::Truncated, source_ + ": file ends inside the magic");
    }
    if (!prefix_ok) {
        throw FormatError(FormatError::Kind::BadMagic,
                          source_ + ": bad magic, expected \"" + std::string(four) + "\"");
    }
    pos_ += four.size();
}

void ByteReader::expect_version(std::uint32_t version) {
    const std::uint32_t got = u32();
    if (got != version) {
        throw FormatError(FormatError::Kind::BadVersion,
                          source_ + ": unsupported version " + std::to_string(got));
    }
}

std::uint32_t ByteReader::u32() {
    require(4, "u32");
    std::uint32_t v = 0;
    for (int k = 0; k < 4; ++k) {
        v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + k])) << (8 * k);
    }
    pos_ += 4;
    return v;
}

double ByteReader::f64() {
    require(8, "f64");
    std::uint64_t bits = 0;
    for (int k = 0; k < 8; ++k) {
        bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + k])) << (8 * k);
    }
    pos_ += 8;
    return std::bit_cast<double>(bits);
}

std::vector<char> read_file(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw FormatError(FormatError::Kind::Io, "cannot open " + path.string());
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void atomic_write(const std::filesystem::path &path, const std::vector<char> &bytes) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw FormatError(FormatError::Kind::Io, "cannot write " + tmp.string());
        }
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) {
            throw FormatError(FormatError::Kind::Io, "short write to " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

void atomic_write(const std::filesystem::path &path, std::string_view text) {
    atomic_write(path, std::vector<char>(text.begin(), text.end()));
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string sha256_hex(const void *data, std::size_t size) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data, size, digest, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("sha256 failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int k = 0; k < len; ++k) {
        out.push_back(kHex[digest[k] >> 4]);
        out.push_back(kHex[digest[k] & 0xF]);
    }
    return out;
}

std::string sha256_hex(std::string_view text) { return sha256_hex(text.data(), text.size()); }

std::string sha256_file(const std::filesystem::path &path) {
    const std::vector<char> bytes = read_file(path);
    return sha256_hex(bytes.data(), bytes.size());
}

}  // namespace podr::io
