// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gsav/math.hpp"

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace gsav {

/// Clamp ranges for the material attributes. Defaults span dielectric
/// skin/hair reflectance.
struct MaterialRanges {
    double roughness_min = 0.1;
    double roughness_max = 1.0;
    double f0_min = 0.02;
    double f0_max = 0.2;

    void check() const {
        if (!(roughness_min < roughness_max))
            throw std::invalid_argument("MaterialRanges: roughness_min must be < roughness_max");
        if (!(f0_min < f0_max))
            throw std::invalid_argument("MaterialRanges: f0_min must be < f0_max");
    }
};

/// Initial material values for freshly initialized points.
inline constexpr float kInitRoughness = 0.9f;
inline constexpr float kInitF0 = 0.04f;
inline constexpr float kInitAlbedo = 0.5f;

/// Structure-of-arrays Gaussian point cloud with material and deformation
/// attributes. All arrays are float so the asset format round-trips exactly.
///
/// Layouts (N points, B = num_shape, E = num_expr, K = num_joints):
///   positions      [N][3]
///   rotations      [N][4]   unit quaternion (w, x, y, z)
///   log_scales     [N][3]
///   opacities      [N]
///   albedo         [N][3]   linear RGB
///   roughness, f0  [N]
///   shape_basis    [N][3][B]
///   expr_basis     [N][3][E]
///   pose_basis     [N][3][9K]
///   blend_weights  [N][K+1] column 0 is the root transform
struct GaussianCloud {
    std::size_t num_shape = 0;
    std::size_t num_expr = 0;
    std::size_t num_joints = 0;

    std::vector<float> positions;
    std::vector<float> rotations;
    std::vector<float> log_scales;
    std::vector<float> opacities;
    std::vector<float> albedo;
    std::vector<float> roughness;
    std::vector<float> f0;
    std::vector<float> shape_basis;
    std::vector<float> expr_basis;
    std::vector<float> pose_basis;
    std::vector<float> blend_weights;

    std::size_t size() const { return opacities.size(); }
    std::size_t num_pose_features() const { return 9 * num_joints; }
    std::size_t num_transforms() const { return num_joints + 1; }

    /// Allocates n zero-initialized points (identity rotations, unit scales).
    void resize(std::size_t n, std::size_t shape, std::size_t expr, std::size_t joints) {
        num_shape = shape;
        num_expr = expr;
        num_joints = joints;
        positions.assign(n * 3, 0.0f);
        rotations.assign(n * 4, 0.0f);
        for (std::size_t i = 0; i < n; ++i) rotations[i * 4] = 1.0f;
        log_scales.assign(n * 3, 0.0f);
        opacities.assign(n, 0.0f);
        albedo.assign(n * 3, 0.0f);
        roughness.assign(n, 0.0f);
        f0.assign(n, 0.0f);
        shape_basis.assign(n * 3 * shape, 0.0f);
        expr_basis.assign(n * 3 * expr, 0.0f);
        pose_basis.assign(n * 3 * 9 * joints, 0.0f);
        blend_weights.assign(n * (joints + 1), 0.0f);
    }

    Vec3 position(std::size_t i) const {
        return {positions[3 * i], positions[3 * i + 1], positions[3 * i + 2]};
    }
    void set_position(std::size_t i, const Vec3& p) {
        for (int k = 0; k < 3; ++k) positions[3 * i + k] = static_cast<float>(p[k]);
    }
    Quat rotation(std::size_t i) const {
        return Quat(rotations[4 * i], rotations[4 * i + 1], rotations[4 * i + 2],
                    rotations[4 * i + 3]);
    }
    void set_rotation(std::size_t i, const Quat& q) {
        rotations[4 * i] = static_cast<float>(q.w());
        rotations[4 * i + 1] = static_cast<float>(q.x());
        rotations[4 * i + 2] = static_cast<float>(q.y());
        rotations[4 * i + 3] = static_cast<float>(q.z());
    }
    /// Positive scale (the stored value is its log).
    Vec3 scale(std::size_t i) const {
        return {std::exp(double(log_scales[3 * i])), std::exp(double(log_scales[3 * i + 1])),
                std::exp(double(log_scales[3 * i + 2]))};
    }
    void set_scale(std::size_t i, const Vec3& s) {
        for (int k = 0; k < 3; ++k) log_scales[3 * i + k] = static_cast<float>(std::log(s[k]));
    }
    Vec3 albedo_of(std::size_t i) const {
        return {albedo[3 * i], albedo[3 * i + 1], albedo[3 * i + 2]};
    }

    bool operator==(const GaussianCloud&) const = default;
};

/// Clamps roughness and f0 into their ranges; every other field is copied.
inline GaussianCloud clamp_materials(GaussianCloud cloud, const MaterialRanges& ranges = {}) {
    ranges.check();
    for (float& o : cloud.roughness)
        o = std::clamp(o, float(ranges.roughness_min), float(ranges.roughness_max));
    for (float& f : cloud.f0) f = std::clamp(f, float(ranges.f0_min), float(ranges.f0_max));
    return cloud;
}

}  // namespace gsav
