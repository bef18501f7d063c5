// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gsav/image.hpp"
#include "gsav/io/binary.hpp"

#include <cmath>
#include <sstream>
#include <string>

namespace gsav::io {

/// PFM encoding: "PF" (RGB) or "Pf" (gray), little-endian (negative scale),
/// rows stored bottom to top.
inline Bytes encode_pfm(const Image& img) {
    if (img.channels != 1 && img.channels != 3)
        throw std::invalid_argument("encode_pfm: only 1 or 3 channels");
    Writer w;
    w.raw(std::string(img.channels == 3 ? "PF" : "Pf") + "\n" + std::to_string(img.width) + " " +
          std::to_string(img.height) + "\n-1.0\n");
    for (int y = img.height - 1; y >= 0; --y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < img.channels; ++c) w.scalar(img.at(x, y, c));
    return std::move(w.bytes);
}

inline Image decode_pfm(std::span<const std::uint8_t> data) {
    std::size_t pos = 0;
    auto token = [&]() {
        while (pos < data.size() && std::isspace(data[pos])) ++pos;
        std::string t;
        while (pos < data.size() && !std::isspace(data[pos])) t.push_back(char(data[pos++]));
        return t;
    };
    const std::string magic = token();
    if (magic != "PF" && magic != "Pf") throw AssetError(AssetError::Code::BadMagic, "not a PFM image");
    int w = 0, h = 0;
    double scale = 0.0;
    try {
        w = std::stoi(token());
        h = std::stoi(token());
        scale = std::stod(token());
    } catch (const std::exception&) {
        throw AssetError(AssetError::Code::Format, "malformed PFM header");
    }
    if (w <= 0 || h <= 0 || scale == 0.0) throw AssetError(AssetError::Code::Format, "malformed PFM header");
    ++pos;  // single whitespace byte after the scale
    const int ch = magic == "PF" ? 3 : 1;
    Reader r(data.subspan(std::min(pos, data.size())));
    const bool little = scale < 0.0;
    Image img(w, h, ch);
    const auto raw = r.take(std::size_t(w) * h * ch * 4, "pfm pixels");
    std::size_t k = 0;
    for (int y = h - 1; y >= 0; --y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < ch; ++c, ++k) {
                std::uint32_t u = 0;
                for (int b = 0; b < 4; ++b)
                    u |= std::uint32_t(raw[4 * k + (little ? b : 3 - b)]) << (8 * b);
                img.at(x, y, c) = std::bit_cast<float>(u);
            }
    return img;
}

inline void write_pfm(const std::string& path, const Image& img) { write_file(path, encode_pfm(img)); }
inline Image read_pfm(const std::string& path) { return decode_pfm(read_file(path)); }

}  // namespace gsav::io
