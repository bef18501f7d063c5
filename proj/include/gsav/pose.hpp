// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gsav/math.hpp"

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace gsav {

/// One frame of rig parameters. theta[0] is the global rotation.
struct PoseState {
    std::vector<double> beta;
    std::vector<double> psi;
    std::vector<Vec3> theta;
    Vec3 translation = Vec3::Zero();
    int jaw_index = 2;

    static PoseState rest(std::size_t shape, std::size_t expr, std::size_t joints,
                          int jaw_index = 2) {
        PoseState p;
        p.beta.assign(shape, 0.0);
        p.psi.assign(expr, 0.0);
        p.theta.assign(joints + 1, Vec3::Zero());
        p.jaw_index = jaw_index;
        return p;
    }

    /// Throws std::invalid_argument unless dimensions match and values are finite.
    void check(std::size_t shape, std::size_t expr, std::size_t joints) const {
        auto fail = [](const std::string& what, std::size_t got, std::size_t want) {
            throw std::invalid_argument("PoseState: " + what + " has " + std::to_string(got) +
                                        " entries, expected " + std::to_string(want));
        };
        if (beta.size() != shape) fail("beta", beta.size(), shape);
        if (psi.size() != expr) fail("psi", psi.size(), expr);
        if (theta.size() != joints + 1) fail("theta", theta.size(), joints + 1);
        for (const Vec3& t : theta)
            if (!t.allFinite()) throw std::invalid_argument("PoseState: non-finite axis-angle");
        if (!translation.allFinite())
            throw std::invalid_argument("PoseState: non-finite translation");
    }

    bool operator==(const PoseState&) const = default;
};

}  // namespace gsav
