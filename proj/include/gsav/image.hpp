// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace gsav {

/// Row-major float image, top row first, channels interleaved.
struct Image {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<float> data;

    Image() = default;
    Image(int w, int h, int c, float fill = 0.0f) : width(w), height(h), channels(c) {
        if (w < 0 || h < 0 || (c != 1 && c != 3 && c != 4))
            throw std::invalid_argument("Image: unsupported shape " + std::to_string(w) + "x" +
                                        std::to_string(h) + "x" + std::to_string(c));
        data.assign(static_cast<std::size_t>(w) * h * c, fill);
    }

    std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
    std::size_t index(int x, int y, int c = 0) const {
        return (static_cast<std::size_t>(y) * width + x) * channels + c;
    }
    float& at(int x, int y, int c = 0) { return data[index(x, y, c)]; }
    float at(int x, int y, int c = 0) const { return data[index(x, y, c)]; }

    bool same_shape(const Image& o) const {
        return width == o.width && height == o.height && channels == o.channels;
    }
    bool all_finite() const {
        for (float v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }

    bool operator==(const Image&) const = default;
};

inline void require_same_shape(const Image& a, const Image& b, const char* what) {
    if (!a.same_shape(b))
        throw std::invalid_argument(std::string(what) + ": image shape mismatch (" +
                                    std::to_string(a.width) + "x" + std::to_string(a.height) + "x" +
                                    std::to_string(a.channels) + " vs " + std::to_string(b.width) +
                                    "x" + std::to_string(b.height) + "x" +
                                    std::to_string(b.channels) + ")");
}

}  // namespace gsav
