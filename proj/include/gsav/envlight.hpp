// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gsav/cubemap.hpp"
#include "gsav/image.hpp"
#include "gsav/light.hpp"
#include "gsav/math.hpp"
#include "gsav/microfacet.hpp"
#include "gsav/parallel.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace gsav {

// ---------------------------------------------------------------------------
// Equirectangular mapping. u in [0,1) runs with longitude atan2(x, -z), v in
// [0,1] from +y (top row) to -y.

inline Vec2 direction_to_equirect(const Vec3& d) {
    const Vec3 n = d.normalized();
    const double lon = std::atan2(n.x(), -n.z());
    const double lat = std::acos(std::clamp(n.y(), -1.0, 1.0));
    return {lon / (2.0 * kPi) + 0.5, lat / kPi};
}

inline Vec3 equirect_to_direction(const Vec2& uv) {
    const double lon = (uv.x() - 0.5) * 2.0 * kPi;
    const double lat = uv.y() * kPi;
    const double s = std::sin(lat);
    return {s * std::sin(lon), std::cos(lat), -s * std::cos(lon)};
}

/// Bilinear lookup, wrapping horizontally and clamping vertically.
inline Vec3 equirect_sample(const Image& img, const Vec3& d) {
    const Vec2 uv = direction_to_equirect(d);
    const double x = uv.x() * img.width - 0.5;
    const double y = uv.y() * img.height - 0.5;
    const int x0 = int(std::floor(x)), y0 = int(std::floor(y));
    const double fx = x - x0, fy = y - y0;
    auto tap = [&](int xi, int yi) {
        xi = ((xi % img.width) + img.width) % img.width;
        yi = std::clamp(yi, 0, img.height - 1);
        Vec3 v;
        for (int c = 0; c < 3; ++c) v[c] = img.at(xi, yi, std::min(c, img.channels - 1));
        return v;
    };
    return (1 - fx) * (1 - fy) * tap(x0, y0) + fx * (1 - fy) * tap(x0 + 1, y0) +
           (1 - fx) * fy * tap(x0, y0 + 1) + fx * fy * tap(x0 + 1, y0 + 1);
}

inline Cubemap equirect_to_cubemap(const Image& equirect, int face_res) {
    if (equirect.width < 1 || equirect.height < 1)
        throw std::invalid_argument("equirect_to_cubemap: empty image");
    if (!equirect.all_finite())
        throw std::invalid_argument("equirect_to_cubemap: input has non-finite texels");
    Cubemap cube(face_res);
    parallel_for(0, 6 * std::size_t(face_res), [&](std::size_t row) {
        const int f = int(row / face_res), j = int(row % face_res);
        for (int i = 0; i < face_res; ++i)
            cube.set_texel(f, i, j, equirect_sample(equirect, cube_texel_direction(f, i, j, face_res)));
    });
    return cube;
}

/// Renders a direction -> radiance function into an equirectangular image.
template <typename Fn>
Image make_equirect(int width, int height, Fn&& radiance) {
    Image img(width, height, 3);
    for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
            const Vec3 v = radiance(equirect_to_direction({(x + 0.5) / width, (y + 0.5) / height}));
            for (int c = 0; c < 3; ++c) img.at(x, y, c) = static_cast<float>(v[c]);
        }
    return img;
}

// ---------------------------------------------------------------------------

/// Diffuse convolution: (1/pi) sum_w L(w) max(0, n.w) dw over every input
/// texel with its exact solid angle. The discrete cosine-weight sum stands in
/// for pi, so constant radiance L maps to L exactly.
inline Cubemap compute_irradiance(const Cubemap& cube, int out_res) {
    const int res = cube.res;
    const std::size_t count = cube.texel_count();
    std::vector<Vec3> dirs(count);
    std::vector<Vec3> weighted(count);
    std::vector<double> solid(count);
    for (int f = 0; f < 6; ++f)
        for (int j = 0; j < res; ++j)
            for (int i = 0; i < res; ++i) {
                const std::size_t k = (std::size_t(f) * res + j) * res + i;
                dirs[k] = cube_texel_direction(f, i, j, res);
                solid[k] = cube_texel_solid_angle(i, j, res);
                weighted[k] = cube.texel(f, i, j) * solid[k];
            }

    Cubemap out(out_res);
    parallel_for(0, out.texel_count(), [&](std::size_t t) {
        const int f = int(t / (std::size_t(out_res) * out_res));
        const int j = int((t / out_res) % out_res);
        const int i = int(t % out_res);
        const Vec3 n = cube_texel_direction(f, i, j, out_res);
        Vec3 acc = Vec3::Zero();
        double norm = 0.0;
        for (std::size_t k = 0; k < count; ++k) {
            const double c = n.dot(dirs[k]);
            if (c > 0.0) {
                acc += c * weighted[k];
                norm += c * solid[k];
            }
        }
        out.set_texel(f, i, j, acc / norm);
    }, 16);
    return out;
}

struct PrefilterOptions {
    int samples = 1024;
    std::uint64_t seed = 0;
    double mirror_roughness = 0.02;
};

inline double prefilter_level_roughness(int level, int mips, double mirror_roughness = 0.02) {
    if (level == 0 || mips <= 1) return mirror_roughness;
    return double(level) / double(mips - 1);
}

namespace detail {

/// Box-filtered pyramid used to pick a source level matching each sample's
/// footprint, which suppresses aliasing from sparse importance samples.
inline std::vector<Cubemap> source_pyramid(const Cubemap& cube) {
    std::vector<Cubemap> levels{cube};
    while (levels.back().res > 1 && levels.back().res % 2 == 0)
        levels.push_back(downsample_to(levels.back(), levels.back().res / 2));
    return levels;
}

inline Vec3 pyramid_sample(const std::vector<Cubemap>& levels, const Vec3& d, double lod) {
    lod = std::clamp(lod, 0.0, double(levels.size() - 1));
    const int l0 = int(std::floor(lod));
    const int l1 = std::min<int>(l0 + 1, int(levels.size()) - 1);
    const double t = lod - l0;
    const Vec3 a = cube_sample(levels[l0], d);
    if (t == 0.0) return a;
    return (1.0 - t) * a + t * cube_sample(levels[l1], d);
}

inline Vec2 seeded_shift(std::uint64_t seed, std::uint64_t stream) {
    std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ull + stream);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double a = unit(rng);
    return {a, unit(rng)};
}

}  // namespace detail

/// GGX prefiltered chain. Level m is filtered with roughness m / (mips - 1)
/// (level 0 uses the near-mirror floor) under the n = v = r assumption, each
/// texel being the n.l-weighted average of importance-sampled radiance.
inline std::vector<Cubemap> prefilter_ggx(const Cubemap& cube, int base_res, int mips,
                                          const PrefilterOptions& options = {}) {
    if (mips < 1) throw std::invalid_argument("prefilter_ggx: mips must be >= 1");
    if (base_res < (1 << (mips - 1)))
        throw std::invalid_argument("prefilter_ggx: base_res too small for the mip count");
    if (options.samples < 1) throw std::invalid_argument("prefilter_ggx: samples must be >= 1");

    const std::vector<Cubemap> pyramid = detail::source_pyramid(cube);
    const double texel_solid_angle = 4.0 * kPi / (6.0 * cube.res * cube.res);
    const auto n_samples = std::uint32_t(options.samples);

    std::vector<Cubemap> chain;
    for (int m = 0; m < mips; ++m) {
        const int res = base_res >> m;
        const double o = prefilter_level_roughness(m, mips, options.mirror_roughness);
        const double alpha = microfacet::alpha_from_roughness(o);
        const Vec2 shift = detail::seeded_shift(options.seed, std::uint64_t(m));

        // Sample directions in tangent space are shared by every texel.
        struct Tap {
            Vec3 l;
            double ndotl;
            double lod;
        };
        std::vector<Tap> taps;
        for (std::uint32_t s = 0; s < n_samples; ++s) {
            const Vec3 h = microfacet::sample_ggx_half(microfacet::hammersley(s, n_samples, shift), alpha);
            const Vec3 l(2.0 * h.z() * h.x(), 2.0 * h.z() * h.y(), 2.0 * h.z() * h.z() - 1.0);
            if (l.z() <= 0.0) continue;
            const double pdf = microfacet::ggx_d(h.z(), alpha) / 4.0;
            const double sample_solid_angle = 1.0 / (double(n_samples) * pdf);
            const double lod = 0.5 * std::log2(sample_solid_angle / texel_solid_angle) + 1.0;
            taps.push_back({l, l.z(), lod});
        }

        Cubemap level(res);
        parallel_for(0, level.texel_count(), [&](std::size_t t) {
            const int f = int(t / (std::size_t(res) * res));
            const int j = int((t / res) % res);
            const int i = int(t % res);
            const Vec3 r = cube_texel_direction(f, i, j, res);
            Vec3 acc = Vec3::Zero();
            double wsum = 0.0;
            for (const Tap& tap : taps) {
                acc += tap.ndotl * detail::pyramid_sample(pyramid, microfacet::to_world(tap.l, r), tap.lod);
                wsum += tap.ndotl;
            }
            level.set_texel(f, i, j, wsum > 0.0 ? Vec3(acc / wsum) : cube_sample(cube, r));
        }, 16);
        chain.push_back(std::move(level));
    }
    return chain;
}

struct LutOptions {
    int samples = 1024;
    std::uint64_t seed = 0;
};

/// Split-sum BRDF table: per (roughness, n.v) the Fresnel scale and bias
/// with GGX importance sampling and the Smith-Schlick geometry term.
inline BrdfLut compute_brdf_lut(int res, const LutOptions& options = {}) {
    if (res < 2) throw std::invalid_argument("compute_brdf_lut: res must be >= 2");
    if (options.samples < 1) throw std::invalid_argument("compute_brdf_lut: samples must be >= 1");
    BrdfLut lut(res);
    const auto n_samples = std::uint32_t(options.samples);
    const Vec2 shift = detail::seeded_shift(options.seed, 0x4c5554);
    parallel_for(0, std::size_t(res) * res, [&](std::size_t cell) {
        const int row = int(cell / res), col = int(cell % res);
        const double o = double(row) / (res - 1);
        const double ndotv = std::max(double(col) / (res - 1), 1e-4);
        const double alpha = microfacet::alpha_from_roughness(o);
        const double k = microfacet::k_from_roughness(o);
        const Vec3 v(std::sqrt(1.0 - ndotv * ndotv), 0.0, ndotv);
        double scale = 0.0, bias = 0.0;
        for (std::uint32_t s = 0; s < n_samples; ++s) {
            const Vec3 h = microfacet::sample_ggx_half(microfacet::hammersley(s, n_samples, shift), alpha);
            const double vdoth = v.dot(h);
            const Vec3 l = 2.0 * vdoth * h - v;
            const double ndotl = l.z();
            if (ndotl <= 0.0 || vdoth <= 0.0) continue;
            const double ndoth = h.z();
            // G * (v.h) / ((n.h)(n.v)) with the n.v of G1 cancelled analytically.
            const double g_vis = microfacet::smith_g1(ndotl, k) * vdoth /
                                 (ndoth * (ndotv * (1.0 - k) + k));
            const double m = 1.0 - vdoth;
            const double fc = m * m * m * m * m;
            scale += (1.0 - fc) * g_vis;
            bias += fc * g_vis;
        }
        const std::size_t idx = lut.index(row, col);
        lut.data[idx] = static_cast<float>(scale / n_samples);
        lut.data[idx + 1] = static_cast<float>(bias / n_samples);
    }, 8);
    return lut;
}

struct BakeOptions {
    int irradiance_res = 16;
    int env_res = 32;
    int mips = 3;
    int lut_res = 64;
    int prefilter_samples = 1024;
    int lut_samples = 1024;
    std::uint64_t seed = 0;
};

/// Full light bake from a source cube map.
inline EnvironmentLight bake_environment(const Cubemap& source, const BakeOptions& options = {},
                                         std::string name = {}) {
    EnvironmentLight light;
    light.name = std::move(name);
    light.irradiance = compute_irradiance(source, options.irradiance_res);
    light.prefiltered = prefilter_ggx(source, options.env_res, options.mips,
                                      {options.prefilter_samples, options.seed, 0.02});
    light.brdf_lut = compute_brdf_lut(options.lut_res, {options.lut_samples, options.seed});
    light.bake.seed = options.seed;
    light.bake.source_res = source.res;
    light.bake.irradiance_res = options.irradiance_res;
    light.bake.env_res = options.env_res;
    light.bake.mips = options.mips;
    light.bake.lut_res = options.lut_res;
    light.bake.prefilter_samples = options.prefilter_samples;
    light.bake.lut_samples = options.lut_samples;
    return light;
}

// ---------------------------------------------------------------------------

struct ReferenceShading {
    Vec3 diffuse = Vec3::Zero();
    Vec3 specular = Vec3::Zero();
    Vec3 diffuse_stderr = Vec3::Zero();
    Vec3 specular_stderr = Vec3::Zero();
};

/// Unbiased Monte Carlo estimate of the Lambert + microfacet reflection
/// integrals for one shading point: cosine-sampled diffuse, GGX-sampled
/// specular with D, Schlick Fresnel on f0 and the Smith-Schlick term.
inline ReferenceShading mc_reference(const Cubemap& cube, const Vec3& n, const Vec3& v,
                                     const Vec3& albedo, double roughness, double f0, int samples,
                                     std::uint64_t seed) {
    if (samples < 1) throw std::invalid_argument("mc_reference: samples must be >= 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double alpha = microfacet::alpha_from_roughness(roughness);
    const double k = microfacet::k_from_roughness(roughness);
    const double ndotv = n.dot(v);

    Vec3 d_sum = Vec3::Zero(), d_sq = Vec3::Zero(), s_sum = Vec3::Zero(), s_sq = Vec3::Zero();
    for (int s = 0; s < samples; ++s) {
        const Vec2 u1(unit(rng), unit(rng));
        const Vec3 l = microfacet::to_world(microfacet::sample_cosine(u1), n);
        const Vec3 d = albedo.cwiseProduct(cube_sample(cube, l));
        d_sum += d;
        d_sq += d.cwiseProduct(d);

        const Vec2 u2(unit(rng), unit(rng));
        const Vec3 h = microfacet::to_world(microfacet::sample_ggx_half(u2, alpha), n);
        const double vdoth = v.dot(h);
        const Vec3 ls = 2.0 * vdoth * h - v;
        const double ndotl = n.dot(ls);
        Vec3 sp = Vec3::Zero();
        if (ndotl > 0.0 && vdoth > 0.0 && ndotv > 0.0) {
            const double ndoth = n.dot(h);
            const double w = microfacet::schlick_fresnel(vdoth, f0) *
                             microfacet::smith_g(ndotv, ndotl, k) * vdoth / (ndotv * ndoth);
            sp = w * cube_sample(cube, ls);
        }
        s_sum += sp;
        s_sq += sp.cwiseProduct(sp);
    }
    const double inv = 1.0 / samples;
    ReferenceShading r;
    r.diffuse = d_sum * inv;
    r.specular = s_sum * inv;
    auto stderr_of = [&](const Vec3& sum, const Vec3& sq) {
        Vec3 e;
        for (int c = 0; c < 3; ++c) {
            const double mean = sum[c] * inv;
            const double var = std::max(0.0, sq[c] * inv - mean * mean);
            e[c] = std::sqrt(var * inv);
        }
        return e;
    };
    r.diffuse_stderr = stderr_of(d_sum, d_sq);
    r.specular_stderr = stderr_of(s_sum, s_sq);
    return r;
}

}  // namespace gsav
