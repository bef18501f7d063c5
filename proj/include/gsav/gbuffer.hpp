// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gsav/image.hpp"
#include "gsav/math.hpp"

#include <cstdint>
#include <vector>

namespace gsav {

/// Bit set selecting which G-buffer channels the rasterizer blends.
enum class Channel : std::uint32_t {
    Albedo = 1u << 0,
    Roughness = 1u << 1,
    F0 = 1u << 2,
    Normal = 1u << 3,
    Depth = 1u << 4,
};

struct ChannelSet {
    std::uint32_t bits = 0x1f;

    static ChannelSet all() { return {}; }
    static ChannelSet shading() {
        return ChannelSet{}.without(Channel::Depth);
    }
    bool has(Channel c) const { return (bits & std::uint32_t(c)) != 0; }
    ChannelSet with(Channel c) const { return {bits | std::uint32_t(c)}; }
    ChannelSet without(Channel c) const { return {bits & ~std::uint32_t(c)}; }
};

/// One Gaussian's blending weight at a pixel (sigma_i * T_i).
struct Contribution {
    std::uint32_t point;
    float weight;
};

/// Per-pixel rasterizer output.
///
/// Material channels and depth are alpha-weighted sums (premultiplied).
/// Normals are world-space and renormalized where alpha > 0.5.
struct GBuffer {
    int width = 0;
    int height = 0;
    Image albedo;     // 3 channels
    Image roughness;  // 1
    Image f0;         // 1
    Image normal;     // 3
    Image depth;      // 1, camera z
    Image alpha;      // 1

    /// Filled only when the rasterizer is asked to record contributions;
    /// entries per pixel are in blending order.
    std::vector<std::vector<Contribution>> contributions;

    GBuffer() = default;
    GBuffer(int w, int h)
        : width(w), height(h), albedo(w, h, 3), roughness(w, h, 1), f0(w, h, 1), normal(w, h, 3),
          depth(w, h, 1), alpha(w, h, 1) {}

    Vec3 normal_at(int x, int y) const {
        return {normal.at(x, y, 0), normal.at(x, y, 1), normal.at(x, y, 2)};
    }
    Vec3 albedo_at(int x, int y) const {
        return {albedo.at(x, y, 0), albedo.at(x, y, 1), albedo.at(x, y, 2)};
    }
};

}  // namespace gsav
