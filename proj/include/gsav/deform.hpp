// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gsav/cloud.hpp"
#include "gsav/math.hpp"
#include "gsav/parallel.hpp"
#include "gsav/pose.hpp"
#include "gsav/rig.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gsav {

/// Axis-angle (radians) to rotation matrix. The zero vector maps to the
/// identity exactly; small angles use the series form of the coefficients.
inline Mat3 rodrigues(const Vec3& axis_angle) {
    const double theta2 = axis_angle.squaredNorm();
    double a, b;
    if (theta2 < 1e-12) {
        a = 1.0 - theta2 / 6.0;
        b = 0.5 - theta2 / 24.0;
    } else {
        const double theta = std::sqrt(theta2);
        a = std::sin(theta) / theta;
        b = (1.0 - std::cos(theta)) / theta2;
    }
    const Mat3 k = skew(axis_angle);
    return Mat3::Identity() + a * k + b * k * k;
}

/// offsets[i] = sum_m coeffs[m] * basis[i][:][m]; basis layout [N][3][C].
inline std::vector<double> blendshape_offset(std::span<const double> coeffs,
                                             std::span<const float> basis) {
    const std::size_t c = coeffs.size();
    if (c == 0) {
        if (!basis.empty()) throw std::invalid_argument("blendshape_offset: basis has columns but no coefficients");
        return {};
    }
    if (basis.size() % (3 * c) != 0)
        throw std::invalid_argument("blendshape_offset: basis length " + std::to_string(basis.size()) +
                                    " is not a multiple of 3 x " + std::to_string(c));
    const std::size_t rows = basis.size() / c;
    std::vector<double> out(rows, 0.0);
    for (std::size_t r = 0; r < rows; ++r) {
        const float* row = basis.data() + r * c;
        double acc = 0.0;
        for (std::size_t m = 0; m < c; ++m) acc += coeffs[m] * row[m];
        out[r] = acc;
    }
    return out;
}

/// Pose blendshape feature: for every non-global joint, rodrigues(theta_k) - I
/// flattened row-major (9 entries per joint).
inline std::vector<double> pose_feature(std::span<const Vec3> theta) {
    if (theta.empty()) throw std::invalid_argument("pose_feature: theta must include the global joint");
    std::vector<double> out;
    out.reserve(9 * (theta.size() - 1));
    for (std::size_t k = 1; k < theta.size(); ++k) {
        const Mat3 d = rodrigues(theta[k]) - Mat3::Identity();
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) out.push_back(d(r, c));
    }
    return out;
}

/// World transforms of every joint relative to the rest pose: G_k maps a
/// rest-space point to posed space.
struct JointTransforms {
    std::vector<Mat34> transforms;  // [K+1]
    std::vector<Mat3> local_rotations;  // rodrigues(theta_k)
};

/// Forward kinematics. Each joint rotates about its own rest location and the
/// result is composed parent-to-child; the root additionally applies the
/// global translation.
inline JointTransforms forward_kinematics(const Rig& rig, const PoseState& pose) {
    pose.check(rig.num_shape, rig.num_expr, rig.num_joints);
    const std::size_t J = rig.num_transforms();
    if (rig.joint_parents.size() != J || rig.rest_joints.size() != 3 * J)
        throw std::invalid_argument("forward_kinematics: rig joint arrays do not match K");

    JointTransforms out;
    out.transforms.resize(J);
    out.local_rotations.resize(J);
    std::vector<bool> done(J, false);

    auto local = [&](std::size_t k) {
        const Mat3 r = rodrigues(pose.theta[k]);
        out.local_rotations[k] = r;
        const Vec3 j = rig.rest_joint(k);
        Mat34 m;
        m.leftCols<3>() = r;
        m.col(3) = j - r * j;
        return m;
    };

    // Parents may appear after children in the array; resolve recursively.
    auto resolve = [&](auto&& self, std::size_t k) -> void {
        if (done[k]) return;
        const int p = rig.joint_parents[k];
        if (k == 0 || p < 0) {
            Mat34 g = local(k);
            g.col(3) += pose.translation;
            out.transforms[k] = g;
        } else {
            self(self, std::size_t(p));
            out.transforms[k] = compose(out.transforms[p], local(k));
        }
        done[k] = true;
    };
    for (std::size_t k = 0; k < J; ++k) resolve(resolve, k);
    return out;
}

struct SkinnedPoints {
    std::vector<Vec3> positions;
    std::vector<Mat3> rotations;  // R_lbs per point
};

/// Blends the joint transforms per point and applies them. The blend is
/// written as I + sum_k w_k (R_k - I) and sum_k w_k t_k, which equals
/// sum_k w_k G_k for rows on the simplex and keeps the rest pose exact even
/// when float weights do not sum to exactly one.
inline SkinnedPoints lbs(std::span<const Vec3> points, const JointTransforms& joints,
                         std::span<const float> weights) {
    const std::size_t J = joints.transforms.size();
    if (J == 0 || weights.size() != points.size() * J)
        throw std::invalid_argument("lbs: weights must be N x (K+1) = " +
                                    std::to_string(points.size()) + " x " + std::to_string(J));
    std::vector<Mat3> delta(J);
    bool all_identity = true;
    for (std::size_t k = 0; k < J; ++k) {
        delta[k] = joints.transforms[k].leftCols<3>() - Mat3::Identity();
        all_identity = all_identity && delta[k].isZero(0.0) && joints.transforms[k].col(3).isZero(0.0);
    }

    SkinnedPoints out;
    out.positions.resize(points.size());
    out.rotations.resize(points.size());
    parallel_for(0, points.size(), [&](std::size_t i) {
        if (all_identity) {
            out.positions[i] = points[i];
            out.rotations[i] = Mat3::Identity();
            return;
        }
        Mat3 r = Mat3::Zero();
        Vec3 t = Vec3::Zero();
        for (std::size_t k = 0; k < J; ++k) {
            const double w = weights[i * J + k];
            if (w == 0.0) continue;
            r += w * delta[k];
            t += w * joints.transforms[k].col(3);
        }
        r += Mat3::Identity();
        out.rotations[i] = r;
        out.positions[i] = r * points[i] + t;
    }, 256);
    return out;
}

/// Closest proper rotation to a blended (generally non-orthonormal) matrix.
inline Mat3 nearest_rotation(const Mat3& m) {
    const Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Mat3 u = svd.matrixU();
    if ((u * svd.matrixV().transpose()).determinant() < 0.0) u.col(2) = -u.col(2);
    return u * svd.matrixV().transpose();
}

/// Canonical -> posed cloud: shape, expression and pose blendshapes followed by
/// linear blend skinning. Rotations are left-multiplied by the rotation
/// nearest R_lbs; every other attribute is copied.
inline GaussianCloud pose_cloud(const GaussianCloud& cloud, const Rig& rig, const PoseState& pose) {
    if (cloud.num_shape != rig.num_shape || cloud.num_expr != rig.num_expr ||
        cloud.num_joints != rig.num_joints)
        throw std::invalid_argument("pose_cloud: cloud dimensions do not match the rig");
    const JointTransforms joints = forward_kinematics(rig, pose);
    const std::vector<double> pose_feat = pose_feature(pose.theta);
    const std::size_t N = cloud.size();

    auto nonzero = [](std::span<const double> v) {
        for (double x : v)
            if (x != 0.0) return true;
        return false;
    };
    const bool use_shape = nonzero(pose.beta);
    const bool use_expr = nonzero(pose.psi);
    const bool use_pose = nonzero(pose_feat);

    std::vector<Vec3> deformed(N);
    parallel_for(0, N, [&](std::size_t i) {
        Vec3 x = cloud.position(i);
        auto add = [&](const std::vector<double>& coeffs, const std::vector<float>& basis) {
            const std::size_t c = coeffs.size();
            const float* b = basis.data() + i * 3 * c;
            for (int axis = 0; axis < 3; ++axis) {
                double acc = 0.0;
                for (std::size_t m = 0; m < c; ++m) acc += coeffs[m] * b[axis * c + m];
                x[axis] += acc;
            }
        };
        if (use_shape) add(pose.beta, cloud.shape_basis);
        if (use_expr) add(pose.psi, cloud.expr_basis);
        if (use_pose) add(pose_feat, cloud.pose_basis);
        deformed[i] = x;
    }, 256);

    const SkinnedPoints skinned = lbs(deformed, joints, cloud.blend_weights);

    GaussianCloud out = cloud;
    parallel_for(0, N, [&](std::size_t i) {
        out.set_position(i, skinned.positions[i]);
        const Mat3& r = skinned.rotations[i];
        if (r == Mat3::Identity()) {
            out.set_rotation(i, cloud.rotation(i).normalized());
        } else {
            Quat q = Quat(nearest_rotation(r)) * cloud.rotation(i);
            out.set_rotation(i, q.normalized());
        }
    }, 256);
    return out;
}

/// Writes point i of `cloud` as the barycentric combination of face `face`'s
/// vertex attributes. Rotation is set to identity, scale isotropic, opacity
/// 0.5, materials to their initial values. Weight rows are renormalized only
/// when they drift from the simplex by more than the validation tolerance.
inline void sample_face(const Rig& rig, std::size_t face, const Vec3& bary, GaussianCloud& cloud,
                        std::size_t i, double scale) {
    const std::size_t B = rig.num_shape, E = rig.num_expr, K = rig.num_joints, J = K + 1, P = 9 * K;
    const std::uint32_t v[3] = {rig.faces[3 * face], rig.faces[3 * face + 1], rig.faces[3 * face + 2]};

    auto lerp_rows = [&](const std::vector<float>& src, std::vector<float>& dst, std::size_t width) {
        for (std::size_t c = 0; c < width; ++c) {
            const double value = bary[0] * double(src[v[0] * width + c]) +
                                 bary[1] * double(src[v[1] * width + c]) +
                                 bary[2] * double(src[v[2] * width + c]);
            dst[i * width + c] = static_cast<float>(value);
        }
    };
    lerp_rows(rig.vertices, cloud.positions, 3);
    lerp_rows(rig.vertex_shape_basis, cloud.shape_basis, 3 * B);
    lerp_rows(rig.vertex_expr_basis, cloud.expr_basis, 3 * E);
    lerp_rows(rig.vertex_pose_basis, cloud.pose_basis, 3 * P);
    lerp_rows(rig.vertex_weights, cloud.blend_weights, J);

    double sum = 0.0;
    for (std::size_t k = 0; k < J; ++k) sum += cloud.blend_weights[i * J + k];
    if (std::abs(sum - 1.0) > 1e-6 && sum > 0.0)
        for (std::size_t k = 0; k < J; ++k)
            cloud.blend_weights[i * J + k] = static_cast<float>(cloud.blend_weights[i * J + k] / sum);

    cloud.set_rotation(i, Quat::Identity());
    cloud.set_scale(i, Vec3::Constant(scale));
    cloud.opacities[i] = 0.5f;
    for (int c = 0; c < 3; ++c) cloud.albedo[3 * i + c] = kInitAlbedo;
    cloud.roughness[i] = kInitRoughness;
    cloud.f0[i] = kInitF0;
}

/// Options for sampling a cloud on the rig surface.
struct InitOptions {
    std::size_t num_points = 0;
    std::uint64_t seed = 0;
};

/// Sample count for a points-per-face density.
inline std::size_t points_for_density(const Rig& rig, double points_per_face) {
    return static_cast<std::size_t>(std::llround(points_per_face * double(rig.num_faces())));
}

inline double face_area(const Rig& rig, std::size_t f) {
    const Vec3 a = rig.vertex(rig.faces[3 * f]);
    const Vec3 b = rig.vertex(rig.faces[3 * f + 1]);
    const Vec3 c = rig.vertex(rig.faces[3 * f + 2]);
    return 0.5 * (b - a).cross(c - a).norm();
}

/// Samples points on the template mesh: faces drawn proportionally to area,
/// barycentric coordinates uniform, deterministic under the seed. Scale is
/// sqrt(face area) / 3 of the source face.
inline GaussianCloud init_from_rig(const Rig& rig, const InitOptions& options) {
    const std::size_t F = rig.num_faces();
    if (F == 0 || rig.num_vertices() == 0) throw std::invalid_argument("init_from_rig: empty mesh");

    std::vector<double> areas(F);
    for (std::size_t f = 0; f < F; ++f) areas[f] = face_area(rig, f);
    std::mt19937_64 rng(options.seed);
    std::discrete_distribution<std::size_t> pick_face(areas.begin(), areas.end());
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    GaussianCloud cloud;
    cloud.resize(options.num_points, rig.num_shape, rig.num_expr, rig.num_joints);
    for (std::size_t i = 0; i < options.num_points; ++i) {
        const std::size_t f = pick_face(rng);
        double u = unit(rng), v = unit(rng);
        if (u + v > 1.0) {
            u = 1.0 - u;
            v = 1.0 - v;
        }
        sample_face(rig, f, Vec3(1.0 - u - v, u, v), cloud, i, std::sqrt(areas[f]) / 3.0);
    }
    return cloud;
}

}  // namespace gsav
