// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gsav/cloud.hpp"
#include "gsav/io/binary.hpp"

#include <string>

namespace gsav::io {

/// GSAV container
///
///   "GSAV"  u16 version  u16 flags  u32 N  u32 B  u32 E  u32 K
///   f32 arrays: positions, rotations, log_scales, opacities, albedo,
///   roughness, f0, shape_basis, expr_basis, pose_basis, blend_weights
///
/// All values little-endian. Flags record the conventions the arrays were
/// written with; a reader only accepts the ones it implements.
inline constexpr std::uint16_t kAvatarVersion = 1;
inline constexpr std::uint16_t kPoseFeatureRowMajor = 1u << 0;  // (R - I) flattened row by row
inline constexpr std::uint16_t kWeightsRootFirst = 1u << 1;     // W column 0 is the root
inline constexpr std::uint16_t kAvatarFlags = kPoseFeatureRowMajor | kWeightsRootFirst;

namespace detail {

struct ArraySpec {
    const char* name;
    std::vector<float> GaussianCloud::*field;
    std::size_t per_point;
};

inline std::vector<ArraySpec> avatar_arrays(std::size_t B, std::size_t E, std::size_t K) {
    return {{"positions", &GaussianCloud::positions, 3},
            {"rotations", &GaussianCloud::rotations, 4},
            {"log_scales", &GaussianCloud::log_scales, 3},
            {"opacities", &GaussianCloud::opacities, 1},
            {"albedo", &GaussianCloud::albedo, 3},
            {"roughness", &GaussianCloud::roughness, 1},
            {"f0", &GaussianCloud::f0, 1},
            {"shape_basis", &GaussianCloud::shape_basis, 3 * B},
            {"expr_basis", &GaussianCloud::expr_basis, 3 * E},
            {"pose_basis", &GaussianCloud::pose_basis, 27 * K},
            {"blend_weights", &GaussianCloud::blend_weights, K + 1}};
}

}  // namespace detail

inline Bytes encode_avatar(const GaussianCloud& cloud) {
    const std::size_t N = cloud.size();
    Writer w;
    w.raw("GSAV");
    w.scalar(kAvatarVersion);
    w.scalar(kAvatarFlags);
    for (std::size_t d : {N, cloud.num_shape, cloud.num_expr, cloud.num_joints}) w.scalar(std::uint32_t(d));
    for (const auto& a : detail::avatar_arrays(cloud.num_shape, cloud.num_expr, cloud.num_joints)) {
        const std::vector<float>& v = cloud.*a.field;
        if (v.size() != N * a.per_point)
            throw std::invalid_argument(std::string("encode_avatar: array '") + a.name + "' has the wrong length");
        w.floats(v);
    }
    return std::move(w.bytes);
}

inline GaussianCloud decode_avatar(std::span<const std::uint8_t> data) {
    Reader r(data);
    const auto magic = r.take(4, "magic");
    if (std::string(magic.begin(), magic.end()) != "GSAV")
        throw AssetError(AssetError::Code::BadMagic, "not a GSAV avatar asset");
    const auto version = r.scalar<std::uint16_t>("version");
    if (version != kAvatarVersion)
        throw AssetError(AssetError::Code::BadVersion, "GSAV version " + std::to_string(version) +
                                                           " is not supported (expected " +
                                                           std::to_string(kAvatarVersion) + ")");
    const auto flags = r.scalar<std::uint16_t>("flags");
    if (flags != kAvatarFlags)
        throw AssetError(AssetError::Code::Format, "GSAV convention flags " + std::to_string(flags) + " are not supported");
    const std::size_t N = r.scalar<std::uint32_t>("N"), B = r.scalar<std::uint32_t>("B"),
                      E = r.scalar<std::uint32_t>("E"), K = r.scalar<std::uint32_t>("K");
    const auto arrays = detail::avatar_arrays(B, E, K);

    std::size_t per_point = 0;
    for (const auto& a : arrays) per_point += a.per_point;
    const std::size_t expected = per_point * N * 4;
    if (r.remaining() > expected)
        throw AssetError(AssetError::Code::DimMismatch,
                         "GSAV header dims (N=" + std::to_string(N) + ", B=" + std::to_string(B) +
                             ", E=" + std::to_string(E) + ", K=" + std::to_string(K) + ") account for " +
                             std::to_string(expected) + " payload bytes but the file has " +
                             std::to_string(r.remaining()));

    GaussianCloud cloud;
    cloud.num_shape = B;
    cloud.num_expr = E;
    cloud.num_joints = K;
    for (const auto& a : arrays) cloud.*a.field = r.floats(N * a.per_point, a.name);
    return cloud;
}

inline void save_avatar(const std::string& path, const GaussianCloud& cloud) { write_file(path, encode_avatar(cloud)); }
inline GaussianCloud load_avatar(const std::string& path) { return decode_avatar(read_file(path)); }

}  // namespace gsav::io
