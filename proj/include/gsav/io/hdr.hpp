// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gsav/image.hpp"
#include "gsav/io/binary.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gsav::io {

/// Radiance RGBE reader: "-Y h +X w" orientation, flat or new-style
/// run-length encoded scanlines.
inline Image decode_hdr(std::span<const std::uint8_t> data) {
    std::size_t pos = 0;
    auto line = [&]() {
        std::string s;
        while (pos < data.size() && data[pos] != '\n') s.push_back(char(data[pos++]));
        if (pos >= data.size()) throw AssetError(AssetError::Code::Truncated, "truncated HDR header");
        ++pos;
        return s;
    };
    const std::string first = line();
    if (first.rfind("#?", 0) != 0) throw AssetError(AssetError::Code::BadMagic, "not a Radiance HDR image");
    for (;;) {
        const std::string l = line();
        if (l.empty()) break;
        if (l.rfind("FORMAT=", 0) == 0 && l != "FORMAT=32-bit_rle_rgbe")
            throw AssetError(AssetError::Code::Format, "unsupported HDR format '" + l + "'");
    }
    int w = 0, h = 0;
    {
        const std::string res = line();
        char ys[3] = {}, xs[3] = {};
        if (std::sscanf(res.c_str(), "%2s %d %2s %d", ys, &h, xs, &w) != 4 || std::string(ys) != "-Y" ||
            std::string(xs) != "+X" || w <= 0 || h <= 0)
            throw AssetError(AssetError::Code::Format, "unsupported HDR resolution line '" + res + "'");
    }
    Reader r(data.subspan(pos));
    Image img(w, h, 3);
    std::vector<std::uint8_t> scan(std::size_t(w) * 4);
    for (int y = 0; y < h; ++y) {
        const std::string what = "hdr scanline " + std::to_string(y);
        const auto head = r.take(4, what);
        if (w >= 8 && w < 32768 && head[0] == 2 && head[1] == 2 && (head[2] & 0x80) == 0) {
            if (((head[2] << 8) | head[3]) != w) throw AssetError(AssetError::Code::Format, "HDR scanline width mismatch");
            for (int c = 0; c < 4; ++c) {
                int x = 0;
                while (x < w) {
                    int count = r.take(1, what)[0];
                    if (count > 128) {
                        count -= 128;
                        if (x + count > w) throw AssetError(AssetError::Code::Format, "bad HDR run length");
                        const std::uint8_t v = r.take(1, what)[0];
                        for (int k = 0; k < count; ++k) scan[std::size_t(x++) * 4 + c] = v;
                    } else {
                        if (count == 0 || x + count > w) throw AssetError(AssetError::Code::Format, "bad HDR run length");
                        const auto run = r.take(std::size_t(count), what);
                        for (int k = 0; k < count; ++k) scan[std::size_t(x++) * 4 + c] = run[k];
                    }
                }
            }
        } else {
            std::copy(head.begin(), head.end(), scan.begin());
            const auto rest = r.take(std::size_t(w - 1) * 4, what);
            std::copy(rest.begin(), rest.end(), scan.begin() + 4);
        }
        for (int x = 0; x < w; ++x) {
            const std::uint8_t* p = &scan[std::size_t(x) * 4];
            const float f = p[3] == 0 ? 0.0f : float(std::ldexp(1.0, int(p[3]) - 136));
            for (int c = 0; c < 3; ++c) img.at(x, y, c) = float(p[c]) * f;
        }
    }
    return img;
}

/// Flat (uncompressed) RGBE writer.
inline Bytes encode_hdr(const Image& img) {
    if (img.channels != 3) throw std::invalid_argument("encode_hdr: needs 3 channels");
    Writer w;
    w.raw("#?RADIANCE\nFORMAT=32-bit_rle_rgbe\n\n-Y " + std::to_string(img.height) + " +X " +
          std::to_string(img.width) + "\n");
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            const double r = std::max(0.0f, img.at(x, y, 0)), g = std::max(0.0f, img.at(x, y, 1)),
                         b = std::max(0.0f, img.at(x, y, 2));
            const double v = std::max({r, g, b});
            if (v < 1e-32) {
                w.scalar(std::uint32_t(0));
                continue;
            }
            int e = 0;
            const double scale = std::frexp(v, &e) * 256.0 / v;
            const std::uint8_t px[4] = {std::uint8_t(std::min(255.0, r * scale)), std::uint8_t(std::min(255.0, g * scale)),
                                        std::uint8_t(std::min(255.0, b * scale)), std::uint8_t(e + 128)};
            w.raw(std::span<const std::uint8_t>(px, 4));
        }
    return std::move(w.bytes);
}

inline Image read_hdr(const std::string& path) { return decode_hdr(read_file(path)); }
inline void write_hdr(const std::string& path, const Image& img) { write_file(path, encode_hdr(img)); }

}  // namespace gsav::io
