// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gsav/image.hpp"
#include "gsav/io/binary.hpp"

#include <png.h>

#include <csetjmp>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>

namespace gsav::io {

inline constexpr double kDisplayGamma = 2.2;

/// Linear value -> 8-bit display code: clamp to [0, 1], then x^(1/2.2).
inline std::uint8_t to_display(double v) {
    if (!(v > 0.0)) return 0;
    if (v >= 1.0) return 255;
    return std::uint8_t(std::lround(255.0 * std::pow(v, 1.0 / kDisplayGamma)));
}

inline double from_display(std::uint8_t c) { return std::pow(c / 255.0, kDisplayGamma); }

namespace detail {

struct PngSource {
    std::span<const std::uint8_t> data;
    std::size_t pos = 0;
};

inline void png_append(png_structp png, png_bytep data, png_size_t len) {
    auto* out = static_cast<Bytes*>(png_get_io_ptr(png));
    out->insert(out->end(), data, data + len);
}

inline void png_consume(png_structp png, png_bytep out, png_size_t len) {
    auto* src = static_cast<PngSource*>(png_get_io_ptr(png));
    if (src->pos + len > src->data.size()) png_error(png, "truncated PNG");
    std::memcpy(out, src->data.data() + src->pos, len);
    src->pos += len;
}

// libpng reports errors by longjmp; the message is parked in the error pointer.
inline void png_fail(png_structp png, png_const_charp msg) {
    auto* dst = static_cast<char*>(png_get_error_ptr(png));
    std::snprintf(dst, 256, "%s", msg);
    png_longjmp(png, 1);
}
inline void png_warn(png_structp, png_const_charp) {}

}  // namespace detail

/// 8-bit RGB PNG of a 3-channel (or gray 1-channel) linear image.
inline Bytes encode_png(const Image& img) {
    if (img.channels != 1 && img.channels != 3) throw std::invalid_argument("encode_png: 1 or 3 channels");
    std::vector<png_byte> pixels(std::size_t(img.width) * img.height * 3);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < 3; ++c)
                pixels[(std::size_t(y) * img.width + x) * 3 + c] = to_display(img.at(x, y, img.channels == 3 ? c : 0));
    Bytes out;
    char msg[256] = "png error";
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, msg, detail::png_fail, detail::png_warn);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw AssetError(AssetError::Code::Io, "libpng initialisation failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw AssetError(AssetError::Code::Format, msg);
    }
    png_set_write_fn(png, &out, detail::png_append, nullptr);
    png_set_IHDR(png, info, png_uint_32(img.width), png_uint_32(img.height), 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_set_gAMA(png, info, 1.0 / kDisplayGamma);
    png_write_info(png, info);
    for (int y = 0; y < img.height; ++y) png_write_row(png, &pixels[std::size_t(y) * img.width * 3]);
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return out;
}

/// Decodes 8-bit gray/RGB/RGBA PNGs back to linear RGB (alpha dropped).
inline Image decode_png(std::span<const std::uint8_t> data) {
    if (data.size() < 8 || png_sig_cmp(data.data(), 0, 8) != 0)
        throw AssetError(AssetError::Code::BadMagic, "not a PNG image");
    detail::PngSource src{data, 0};
    std::vector<png_byte> pixels;
    png_uint_32 w = 0, h = 0;
    char msg[256] = "png error";
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, msg, detail::png_fail, detail::png_warn);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw AssetError(AssetError::Code::Io, "libpng initialisation failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw AssetError(AssetError::Code::Format, msg);
    }
    png_set_read_fn(png, &src, detail::png_consume);
    png_read_info(png, info);
    png_set_strip_16(png);
    png_set_palette_to_rgb(png);
    png_set_gray_to_rgb(png);
    png_set_strip_alpha(png);
    png_read_update_info(png, info);
    w = png_get_image_width(png, info);
    h = png_get_image_height(png, info);
    if (png_get_rowbytes(png, info) != std::size_t(w) * 3) png_error(png, "unsupported PNG layout");
    pixels.resize(std::size_t(w) * h * 3);
    for (png_uint_32 y = 0; y < h; ++y) png_read_row(png, &pixels[std::size_t(y) * w * 3], nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    Image img(int(w), int(h), 3);
    for (std::size_t k = 0; k < pixels.size(); ++k) img.data[k] = float(from_display(pixels[k]));
    return img;
}

inline void write_png(const std::string& path, const Image& img) { write_file(path, encode_png(img)); }
inline Image read_png(const std::string& path) { return decode_png(read_file(path)); }

}  // namespace gsav::io
