// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gsav/cloud.hpp"
#include "gsav/rig.hpp"

#include <cstdint>
#include <random>

namespace gsav::testing {

/// Octahedron rig with a root -> 1 -> 2 chain plus joint 3 hanging off the
/// root, random bases and random simplex weights.
inline Rig make_octahedron_rig(std::uint64_t seed, std::size_t shape = 4, std::size_t expr = 3) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_real_distribution<double> pos(0.05, 1.0);

    Rig rig;
    rig.num_shape = shape;
    rig.num_expr = expr;
    rig.num_joints = 3;
    rig.jaw_index = 2;
    rig.vertices = {1, 0, 0, -1, 0, 0, 0, 1, 0, 0, -1, 0, 0, 0, 1, 0, 0, -1};
    rig.faces = {0, 2, 4, 2, 1, 4, 1, 3, 4, 3, 0, 4, 2, 0, 5, 1, 2, 5, 3, 1, 5, 0, 3, 5};
    rig.joint_parents = {-1, 0, 1, 0};
    rig.rest_joints = {0.0f, -0.5f, 0.0f, 0.0f, -0.2f, 0.1f, 0.0f, 0.1f, 0.3f, 0.3f, 0.2f, 0.4f};
    const std::size_t V = rig.num_vertices(), J = rig.num_transforms();
    auto fill = [&](std::vector<float>& v, std::size_t n, double amp) {
        v.resize(n);
        for (float& x : v) x = static_cast<float>(amp * u(rng));
    };
    fill(rig.vertex_shape_basis, V * 3 * shape, 0.05);
    fill(rig.vertex_expr_basis, V * 3 * expr, 0.05);
    fill(rig.vertex_pose_basis, V * 27 * rig.num_joints, 0.02);
    rig.vertex_weights.resize(V * J);
    for (std::size_t v = 0; v < V; ++v) {
        double sum = 0.0;
        std::vector<double> w(J);
        for (double& x : w) sum += (x = pos(rng));
        // Largest entry absorbs the float rounding so each row sums to 1 in double.
        float acc = 0.0f;
        for (std::size_t k = 1; k < J; ++k) {
            rig.vertex_weights[v * J + k] = static_cast<float>(w[k] / sum);
            acc += rig.vertex_weights[v * J + k];
        }
        rig.vertex_weights[v * J] = 1.0f - acc;
    }
    return rig;
}

}  // namespace gsav::testing
