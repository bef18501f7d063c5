// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gsav/cloud.hpp"
#include "gsav/rig.hpp"

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace gsav {

/// One failed invariant: which field, which element, the offending value.
struct Violation {
    std::string field;
    std::size_t index = 0;
    double value = 0.0;
    std::string message;
};

inline constexpr double kUnitTolerance = 1e-6;

namespace detail {

inline void check_weight_rows(const std::vector<float>& w, std::size_t cols, const char* field,
                              std::vector<Violation>& out) {
    if (cols == 0) return;
    const std::size_t rows = w.size() / cols;
    for (std::size_t r = 0; r < rows; ++r) {
        double sum = 0.0;
        bool negative = false;
        for (std::size_t c = 0; c < cols; ++c) {
            const double v = w[r * cols + c];
            if (!(v >= 0.0)) negative = true;
            sum += v;
        }
        if (negative)
            out.push_back({field, r, sum, "row has a negative or non-finite weight"});
        else if (std::abs(sum - 1.0) > kUnitTolerance)
            out.push_back({field, r, sum, "row does not sum to 1"});
    }
}

inline void check_length(const std::vector<float>& a, std::size_t expected, const char* field,
                         std::vector<Violation>& out) {
    if (a.size() != expected)
        out.push_back({field, 0, double(a.size()),
                       "length " + std::to_string(a.size()) + ", expected " +
                           std::to_string(expected)});
}

}  // namespace detail

/// Checks rig invariants: tree-shaped hierarchy rooted at 0, face indices in
/// range, weight rows on the simplex, array lengths.
inline std::vector<Violation> validate(const Rig& rig) {
    std::vector<Violation> out;
    const std::size_t V = rig.num_vertices();
    const std::size_t J = rig.num_transforms();

    if (rig.joint_parents.size() != J)
        out.push_back({"joint_parents", 0, double(rig.joint_parents.size()), "length != K+1"});
    for (std::size_t k = 0; k < rig.joint_parents.size(); ++k) {
        const int p = rig.joint_parents[k];
        if (k == 0 && p >= 0) out.push_back({"joint_parents", 0, double(p), "root must have no parent"});
        if (k > 0 && (p < 0 || std::size_t(p) >= rig.joint_parents.size()))
            out.push_back({"joint_parents", k, double(p), "parent index out of range"});
    }
    // Every joint must reach the root without revisiting a joint.
    for (std::size_t k = 1; k < rig.joint_parents.size(); ++k) {
        std::size_t steps = 0;
        int cur = int(k);
        while (cur > 0 && steps <= rig.joint_parents.size()) {
            const int p = rig.joint_parents[cur];
            if (p < 0 || std::size_t(p) >= rig.joint_parents.size()) break;
            cur = p;
            ++steps;
        }
        if (cur != 0) out.push_back({"joint_parents", k, double(k), "joint does not reach the root (cycle)"});
    }
    if (rig.jaw_index <= 0 || std::size_t(rig.jaw_index) >= J)
        out.push_back({"jaw_index", 0, double(rig.jaw_index), "jaw must be a non-root joint"});

    detail::check_length(rig.rest_joints, J * 3, "rest_joints", out);
    detail::check_length(rig.vertex_shape_basis, V * 3 * rig.num_shape, "vertex_shape_basis", out);
    detail::check_length(rig.vertex_expr_basis, V * 3 * rig.num_expr, "vertex_expr_basis", out);
    detail::check_length(rig.vertex_pose_basis, V * 27 * rig.num_joints, "vertex_pose_basis", out);
    detail::check_length(rig.vertex_weights, V * J, "vertex_weights", out);
    if (rig.vertices.size() % 3 != 0)
        out.push_back({"vertices", 0, double(rig.vertices.size()), "length not a multiple of 3"});
    if (rig.faces.size() % 3 != 0)
        out.push_back({"faces", 0, double(rig.faces.size()), "length not a multiple of 3"});
    for (std::size_t f = 0; f < rig.faces.size(); ++f)
        if (rig.faces[f] >= V) out.push_back({"faces", f / 3, double(rig.faces[f]), "vertex index >= V"});
    if (rig.vertex_weights.size() == V * J)
        detail::check_weight_rows(rig.vertex_weights, J, "vertex_weights", out);
    return out;
}

/// Checks cloud invariants and that its dimensions agree with the rig.
inline std::vector<Violation> validate(const GaussianCloud& cloud, const Rig& rig,
                                       const MaterialRanges& ranges = {}) {
    std::vector<Violation> out;
    const std::size_t N = cloud.size();
    const std::size_t J = cloud.num_transforms();

    if (cloud.num_shape != rig.num_shape)
        out.push_back({"shape_basis", 0, double(cloud.num_shape), "|beta| differs from rig"});
    if (cloud.num_expr != rig.num_expr)
        out.push_back({"expr_basis", 0, double(cloud.num_expr), "|psi| differs from rig"});
    if (cloud.num_joints != rig.num_joints)
        out.push_back({"pose_basis", 0, double(cloud.num_joints), "K differs from rig"});

    detail::check_length(cloud.positions, N * 3, "positions", out);
    detail::check_length(cloud.rotations, N * 4, "rotations", out);
    detail::check_length(cloud.log_scales, N * 3, "log_scales", out);
    detail::check_length(cloud.albedo, N * 3, "albedo", out);
    detail::check_length(cloud.roughness, N, "roughness", out);
    detail::check_length(cloud.f0, N, "f0", out);
    detail::check_length(cloud.shape_basis, N * 3 * cloud.num_shape, "shape_basis", out);
    detail::check_length(cloud.expr_basis, N * 3 * cloud.num_expr, "expr_basis", out);
    detail::check_length(cloud.pose_basis, N * 27 * cloud.num_joints, "pose_basis", out);
    detail::check_length(cloud.blend_weights, N * J, "blend_weights", out);
    if (!out.empty()) return out;

    for (std::size_t i = 0; i < N; ++i) {
        for (int k = 0; k < 3; ++k) {
            if (!std::isfinite(cloud.positions[3 * i + k]))
                out.push_back({"positions", i, cloud.positions[3 * i + k], "non-finite"});
            if (!std::isfinite(cloud.log_scales[3 * i + k]))
                out.push_back({"log_scales", i, cloud.log_scales[3 * i + k], "non-finite"});
            const double a = cloud.albedo[3 * i + k];
            if (!(a >= 0.0 && a <= 1.0)) out.push_back({"albedo", i, a, "outside [0,1]"});
        }
        const double qn = cloud.rotation(i).norm();
        if (!(std::abs(qn - 1.0) <= kUnitTolerance))
            out.push_back({"rotations", i, qn, "quaternion is not unit length"});
        const double op = cloud.opacities[i];
        if (!(op >= 0.0 && op <= 1.0)) out.push_back({"opacities", i, op, "outside [0,1]"});
        const double o = cloud.roughness[i];
        if (!(o >= float(ranges.roughness_min) && o <= float(ranges.roughness_max)))
            out.push_back({"roughness", i, o, "outside clamp range"});
        const double f = cloud.f0[i];
        if (!(f >= float(ranges.f0_min) && f <= float(ranges.f0_max)))
            out.push_back({"f0", i, f, "outside clamp range"});
    }
    detail::check_weight_rows(cloud.blend_weights, J, "blend_weights", out);
    return out;
}

}  // namespace gsav
