// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gsav/math.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace gsav {

/// Template mesh plus skeleton and per-vertex deformation data.
///
/// joint_parents[0] is -1 (the root, which carries the global pose). Rest
/// joint locations are fixed per rig. Vertex arrays follow the same layouts
/// as GaussianCloud with V in place of N.
struct Rig {
    std::size_t num_shape = 0;
    std::size_t num_expr = 0;
    std::size_t num_joints = 0;  // K, excluding the root
    int jaw_index = 2;

    std::vector<float> vertices;            // [V][3]
    std::vector<std::uint32_t> faces;       // [F][3]
    std::vector<std::int32_t> joint_parents;  // [K+1]
    std::vector<float> rest_joints;         // [K+1][3]
    std::vector<float> vertex_shape_basis;  // [V][3][B]
    std::vector<float> vertex_expr_basis;   // [V][3][E]
    std::vector<float> vertex_pose_basis;   // [V][3][9K]
    std::vector<float> vertex_weights;      // [V][K+1]

    std::size_t num_vertices() const { return vertices.size() / 3; }
    std::size_t num_faces() const { return faces.size() / 3; }
    std::size_t num_transforms() const { return num_joints + 1; }

    Vec3 vertex(std::size_t v) const {
        return {vertices[3 * v], vertices[3 * v + 1], vertices[3 * v + 2]};
    }
    Vec3 rest_joint(std::size_t k) const {
        return {rest_joints[3 * k], rest_joints[3 * k + 1], rest_joints[3 * k + 2]};
    }

    bool operator==(const Rig&) const = default;
};

}  // namespace gsav
