// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gsav/math.hpp"

#include <cmath>
#include <cstdint>

namespace gsav::microfacet {

/// GGX alpha from perceptual roughness.
inline double alpha_from_roughness(double o) { return o * o; }

/// Smith-Schlick k for image-based lighting.
inline double k_from_roughness(double o) { return 0.5 * o * o; }

/// GGX / Trowbridge-Reitz normal distribution.
inline double ggx_d(double ndoth, double alpha) {
    const double a2 = alpha * alpha;
    const double d = ndoth * ndoth * (a2 - 1.0) + 1.0;
    return a2 / (kPi * d * d);
}

inline double smith_g1(double ndotx, double k) { return ndotx / (ndotx * (1.0 - k) + k); }

inline double smith_g(double ndotv, double ndotl, double k) {
    return smith_g1(ndotv, k) * smith_g1(ndotl, k);
}

inline double schlick_fresnel(double vdoth, double f0) {
    const double m = 1.0 - vdoth;
    const double m2 = m * m;
    return f0 + (1.0 - f0) * m2 * m2 * m;
}

/// Van der Corput radical inverse in base 2.
inline double radical_inverse(std::uint32_t bits) {
    bits = (bits << 16u) | (bits >> 16u);
    bits = ((bits & 0x55555555u) << 1u) | ((bits & 0xAAAAAAAAu) >> 1u);
    bits = ((bits & 0x33333333u) << 2u) | ((bits & 0xCCCCCCCCu) >> 2u);
    bits = ((bits & 0x0F0F0F0Fu) << 4u) | ((bits & 0xF0F0F0F0u) >> 4u);
    bits = ((bits & 0x00FF00FFu) << 8u) | ((bits & 0xFF00FF00u) >> 8u);
    return double(bits) * 2.3283064365386963e-10;
}

/// i-th Hammersley point, shifted by a Cranley-Patterson rotation.
inline Vec2 hammersley(std::uint32_t i, std::uint32_t n, const Vec2& shift = Vec2::Zero()) {
    double u = double(i) / double(n) + shift.x();
    double v = radical_inverse(i) + shift.y();
    u -= std::floor(u);
    v -= std::floor(v);
    return {u, v};
}

/// GGX-distributed half vector around +z; pdf over h is D(h) (n.h).
inline Vec3 sample_ggx_half(const Vec2& u, double alpha) {
    const double phi = 2.0 * kPi * u.x();
    const double cos_theta = std::sqrt((1.0 - u.y()) / (1.0 + (alpha * alpha - 1.0) * u.y()));
    const double sin_theta = std::sqrt(std::max(0.0, 1.0 - cos_theta * cos_theta));
    return {sin_theta * std::cos(phi), sin_theta * std::sin(phi), cos_theta};
}

/// Cosine-weighted direction around +z; pdf is cos(theta) / pi.
inline Vec3 sample_cosine(const Vec2& u) {
    const double phi = 2.0 * kPi * u.x();
    const double r = std::sqrt(u.y());
    return {r * std::cos(phi), r * std::sin(phi), std::sqrt(std::max(0.0, 1.0 - u.y()))};
}

/// Maps a tangent-space vector (z along n) to world space.
inline Vec3 to_world(const Vec3& local, const Vec3& n) {
    const auto [t, b] = orthonormal_basis(n);
    return local.x() * t + local.y() * b + local.z() * n;
}

}  // namespace gsav::microfacet
