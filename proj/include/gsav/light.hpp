// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gsav/cubemap.hpp"

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace gsav {

/// Split-sum BRDF table. Cell (r, c) sits at roughness r / (res - 1) and
/// n.v = c / (res - 1) and stores the Fresnel (scale, bias) pair.
struct BrdfLut {
    int res = 0;
    std::vector<float> data;  // [res roughness rows][res ndotv cols][2]

    BrdfLut() = default;
    explicit BrdfLut(int resolution) : res(resolution), data(std::size_t(resolution) * resolution * 2, 0.0f) {}

    std::size_t index(int row, int col) const { return (std::size_t(row) * res + col) * 2; }
    float scale(int row, int col) const { return data[index(row, col)]; }
    float bias(int row, int col) const { return data[index(row, col) + 1]; }

    bool operator==(const BrdfLut&) const = default;
};

/// Parameters a light was baked with; carried in the light asset.
struct BakeInfo {
    std::uint64_t seed = 0;
    int source_res = 0;
    int irradiance_res = 16;
    int env_res = 32;
    int mips = 3;
    int lut_res = 64;
    int prefilter_samples = 1024;
    int lut_samples = 1024;
    double mirror_roughness = 0.02;
    std::string distribution = "ggx(alpha=o^2)";
    std::string geometry = "smith-schlick(k=o^2/2)";

    bool operator==(const BakeInfo&) const = default;
};

/// Image-based light: cosine-convolved irradiance (with the 1/pi Lambert
/// factor folded in), a roughness-indexed prefiltered mip chain, and the
/// split-sum BRDF table.
struct EnvironmentLight {
    std::string name;
    Cubemap irradiance;
    std::vector<Cubemap> prefiltered;  // level m has res env_res / 2^m
    BrdfLut brdf_lut;
    double yaw = 0.0;  // radians, applied at lookup time
    BakeInfo bake;

    int mips() const { return static_cast<int>(prefiltered.size()); }

    bool operator==(const EnvironmentLight&) const = default;
};

}  // namespace gsav
