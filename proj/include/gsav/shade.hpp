// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gsav/camera.hpp"
#include "gsav/cubemap.hpp"
#include "gsav/gbuffer.hpp"
#include "gsav/image.hpp"
#include "gsav/light.hpp"
#include "gsav/math.hpp"
#include "gsav/parallel.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace gsav {

/// Display-time edits applied on top of the rendered material maps.
struct ShadeParams {
    double f0_scale = 1.0;
    double roughness_scale = 1.0;
    double env_yaw = 0.0;
    double exposure = 1.0;

    void check() const {
        if (!std::isfinite(f0_scale) || f0_scale < 0.0)
            throw std::invalid_argument("ShadeParams: f0_scale must be finite and >= 0");
        if (!std::isfinite(roughness_scale) || roughness_scale <= 0.0)
            throw std::invalid_argument("ShadeParams: roughness_scale must be finite and > 0");
        if (!std::isfinite(env_yaw)) throw std::invalid_argument("ShadeParams: env_yaw must be finite");
        if (!std::isfinite(exposure) || exposure <= 0.0)
            throw std::invalid_argument("ShadeParams: exposure must be finite and > 0");
    }
};

/// Mirror direction of v about n.
inline Vec3 reflect(const Vec3& n, const Vec3& v) { return 2.0 * n.dot(v) * n - v; }

/// Approximate Fresnel reflectance with the roughness-aware ceiling.
inline double fresnel_ks(double ndotv, double roughness, double f0) {
    const double exponent = (-5.55473 * ndotv - 6.698316) * ndotv;
    // lerp is exact at both ends, so ndotv = 0 returns the ceiling itself.
    return std::lerp(f0, std::max(1.0 - roughness, f0), std::exp2(exponent));
}

/// Total yaw folded into [0, 2pi) so that whole turns sample identically.
inline double wrap_yaw(double yaw) {
    double y = std::fmod(yaw, 2.0 * kPi);
    if (y < 0.0) y += 2.0 * kPi;
    return y;
}

inline Vec3 unrotate(const Vec3& d, double yaw) {
    const double y = wrap_yaw(yaw);
    if (y == 0.0) return d;
    return rotation_y(-y) * d;
}

inline Vec3 sample_irradiance(const EnvironmentLight& env, const Vec3& n, double extra_yaw = 0.0) {
    return cube_sample(env.irradiance, unrotate(n, env.yaw + extra_yaw));
}

/// Fractional mip level for a roughness: linear over [0, M-1].
inline double roughness_to_mip(double roughness, int mips) {
    return saturate(roughness) * double(mips - 1);
}

/// Trilinear lookup in the prefiltered chain.
inline Vec3 sample_prefiltered(const EnvironmentLight& env, const Vec3& r, double roughness,
                               double extra_yaw = 0.0) {
    const int mips = env.mips();
    if (mips == 0) throw std::invalid_argument("sample_prefiltered: light has no prefiltered levels");
    const Vec3 d = unrotate(r, env.yaw + extra_yaw);
    const double level = roughness_to_mip(roughness, mips);
    const int l0 = std::min(int(std::floor(level)), mips - 1);
    const int l1 = std::min(l0 + 1, mips - 1);
    const double t = level - l0;
    const Vec3 a = cube_sample(env.prefiltered[l0], d);
    if (t == 0.0 || l0 == l1) return a;
    return (1.0 - t) * a + t * cube_sample(env.prefiltered[l1], d);
}

struct LutSample {
    double scale = 0.0;
    double bias = 0.0;
};

/// Bilinear lookup at (roughness, n.v), both clamped to [0, 1].
inline LutSample sample_brdf_lut(const BrdfLut& lut, double roughness, double ndotv) {
    const double u = saturate(roughness) * (lut.res - 1);
    const double w = saturate(ndotv) * (lut.res - 1);
    const int r0 = std::min(int(std::floor(u)), lut.res - 1), c0 = std::min(int(std::floor(w)), lut.res - 1);
    const int r1 = std::min(r0 + 1, lut.res - 1), c1 = std::min(c0 + 1, lut.res - 1);
    const double fr = u - r0, fc = w - c0;
    auto mix = [&](auto get) {
        return (1 - fr) * (1 - fc) * get(r0, c0) + (1 - fr) * fc * get(r0, c1) +
               fr * (1 - fc) * get(r1, c0) + fr * fc * get(r1, c1);
    };
    return {mix([&](int r, int c) { return double(lut.scale(r, c)); }),
            mix([&](int r, int c) { return double(lut.bias(r, c)); })};
}

inline LutSample sample_brdf_lut(const EnvironmentLight& env, double roughness, double ndotv) {
    return sample_brdf_lut(env.brdf_lut, roughness, ndotv);
}

/// Material and geometry for one shading point (unpremultiplied).
struct ShadingSample {
    Vec3 albedo = Vec3::Zero();
    double roughness = 0.0;
    double f0 = 0.0;
    Vec3 normal = Vec3::UnitZ();
};

struct ShadedTerms {
    Vec3 diffuse = Vec3::Zero();
    Vec3 specular = Vec3::Zero();
};

/// Roughness and f0 after the display edits: scaled, then clamped to [0, 1].
inline double edited_roughness(double roughness, const ShadeParams& p) {
    return saturate(roughness * p.roughness_scale);
}
inline double edited_f0(double f0, const ShadeParams& p) { return saturate(f0 * p.f0_scale); }

/// Split-sum shading of one point seen along `view` (unit, point -> camera).
/// Exposure is not applied here.
inline ShadedTerms shade_sample(const ShadingSample& s, const Vec3& view, const EnvironmentLight& env,
                                const ShadeParams& params = {}) {
    const Vec3& n = s.normal;
    const double o = edited_roughness(s.roughness, params);
    const double f0 = edited_f0(s.f0, params);
    const double ndotv = saturate(n.dot(view));
    const Vec3 r = reflect(n, view);
    const double ks = fresnel_ks(ndotv, o, f0);
    const LutSample lut = sample_brdf_lut(env, o, ndotv);

    ShadedTerms out;
    out.specular = sample_prefiltered(env, r, o, params.env_yaw) * (ks * lut.scale + lut.bias);
    out.diffuse = s.albedo.cwiseProduct(sample_irradiance(env, n, params.env_yaw));
    return out;
}

/// Reads the unpremultiplied shading inputs of a covered pixel.
inline ShadingSample gbuffer_sample(const GBuffer& gb, int x, int y) {
    const double a = gb.alpha.at(x, y);
    ShadingSample s;
    s.albedo = gb.albedo_at(x, y) / a;
    s.roughness = gb.roughness.at(x, y) / a;
    s.f0 = gb.f0.at(x, y) / a;
    Vec3 n = gb.normal_at(x, y);
    const double len = n.norm();
    s.normal = len > 0.0 ? Vec3(n / len) : Vec3::Zero();
    return s;
}

struct ShadedImage {
    Image color;     // exposure * alpha * (diffuse + specular)
    Image diffuse;   // exposure * alpha * diffuse
    Image specular;  // exposure * alpha * specular
};

/// Deferred shading of a G-buffer. Uncovered pixels stay black.
inline ShadedImage shade_layers(const GBuffer& gb, const Camera& cam, const EnvironmentLight& env,
                                const ShadeParams& params = {}) {
    params.check();
    if (gb.width != cam.width || gb.height != cam.height)
        throw std::invalid_argument("shade: G-buffer and camera resolutions differ");
    ShadedImage out{Image(gb.width, gb.height, 3), Image(gb.width, gb.height, 3),
                    Image(gb.width, gb.height, 3)};
    parallel_for(0, std::size_t(gb.height), [&](std::size_t row) {
        const int y = int(row);
        for (int x = 0; x < gb.width; ++x) {
            const double a = gb.alpha.at(x, y);
            if (!(a > 0.0)) continue;
            const ShadingSample s = gbuffer_sample(gb, x, y);
            const Vec3 view = -cam.pixel_ray(x, y);
            const ShadedTerms t = shade_sample(s, view, env, params);
            const double k = params.exposure * a;
            for (int c = 0; c < 3; ++c) {
                out.diffuse.at(x, y, c) = static_cast<float>(k * t.diffuse[c]);
                out.specular.at(x, y, c) = static_cast<float>(k * t.specular[c]);
                out.color.at(x, y, c) = static_cast<float>(k * (t.diffuse[c] + t.specular[c]));
            }
        }
    }, 4);
    return out;
}

inline Image shade(const GBuffer& gb, const Camera& cam, const EnvironmentLight& env,
                   const ShadeParams& params = {}) {
    return shade_layers(gb, cam, env, params).color;
}

}  // namespace gsav
