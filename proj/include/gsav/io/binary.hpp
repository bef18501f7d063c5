// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gsav/io/error.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gsav::io {

using Bytes = std::vector<std::uint8_t>;

inline Bytes read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw AssetError(AssetError::Code::Io, "cannot open '" + path + "'");
    Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return data;
}

inline void write_file(const std::string& path, std::span<const std::uint8_t> data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw AssetError(AssetError::Code::Io, "cannot write '" + path + "'");
    out.write(reinterpret_cast<const char*>(data.data()), std::streamsize(data.size()));
    if (!out) throw AssetError(AssetError::Code::Io, "write failed for '" + path + "'");
}

/// Appends little-endian scalars.
class Writer {
public:
    Bytes bytes;

    void raw(std::string_view s) { bytes.insert(bytes.end(), s.begin(), s.end()); }
    void raw(std::span<const std::uint8_t> s) { bytes.insert(bytes.end(), s.begin(), s.end()); }

    template <typename T>
    void scalar(T v) {
        using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                  std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint16_t>>;
        const U u = std::bit_cast<U>(v);
        for (std::size_t k = 0; k < sizeof(T); ++k) bytes.push_back(std::uint8_t(u >> (8 * k)));
    }

    void floats(std::span<const float> values) {
        for (float v : values) scalar(v);
    }
};

/// Bounds-checked little-endian cursor. `what` names the field being read
/// so truncation errors say where the file ended.
class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}

    std::size_t remaining() const { return data_.size() - pos_; }
    std::size_t position() const { return pos_; }

    std::span<const std::uint8_t> take(std::size_t n, const std::string& what) {
        if (remaining() < n)
            throw AssetError(AssetError::Code::Truncated,
                             "truncated while reading '" + what + "' (need " + std::to_string(n) +
                                 " bytes, " + std::to_string(remaining()) + " left)");
        const auto out = data_.subspan(pos_, n);
        pos_ += n;
        return out;
    }

    template <typename T>
    T scalar(const std::string& what) {
        using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                  std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint16_t>>;
        const auto b = take(sizeof(T), what);
        U u = 0;
        for (std::size_t k = 0; k < sizeof(T); ++k) u |= U(b[k]) << (8 * k);
        return std::bit_cast<T>(u);
    }

    std::vector<float> floats(std::size_t count, const std::string& what) {
        const auto b = take(count * 4, what);
        std::vector<float> out(count);
        for (std::size_t i = 0; i < count; ++i) {
            std::uint32_t u = 0;
            for (int k = 0; k < 4; ++k) u |= std::uint32_t(b[4 * i + k]) << (8 * k);
            out[i] = std::bit_cast<float>(u);
        }
        return out;
    }

private:
    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
};

}  // namespace gsav::io
