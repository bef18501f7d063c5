// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gsav/camera.hpp"
#include "gsav/cloud.hpp"
#include "gsav/deform.hpp"
#include "gsav/losses.hpp"
#include "gsav/parallel.hpp"
#include "gsav/pose.hpp"
#include "gsav/rasterize.hpp"
#include "gsav/rig.hpp"
#include "gsav/shade.hpp"

#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace gsav {

/// Partial derivatives of shade_sample's diffuse + specular output with
/// respect to the sample's (unedited) material values. Albedo acts per
/// channel, so its Jacobian is diagonal and stored as a vector.
struct ShadingGradients {
    Vec3 d_albedo = Vec3::Zero();
    Vec3 d_roughness = Vec3::Zero();
    Vec3 d_f0 = Vec3::Zero();
};

/// Derivative of the prefiltered lookup with respect to edited roughness.
inline Vec3 prefiltered_roughness_derivative(const EnvironmentLight& env, const Vec3& r,
                                             double roughness, double extra_yaw = 0.0) {
    const int mips = env.mips();
    if (mips < 2) return Vec3::Zero();
    const Vec3 d = unrotate(r, env.yaw + extra_yaw);
    const double level = roughness_to_mip(roughness, mips);
    const int l0 = std::min(int(std::floor(level)), mips - 1);
    const int l1 = std::min(l0 + 1, mips - 1);
    if (l0 == l1) return Vec3::Zero();
    return double(mips - 1) * (cube_sample(env.prefiltered[l1], d) - cube_sample(env.prefiltered[l0], d));
}

/// Derivative of the LUT lookup with respect to roughness.
inline LutSample lut_roughness_derivative(const BrdfLut& lut, double roughness, double ndotv) {
    const double u = saturate(roughness) * (lut.res - 1);
    const double w = saturate(ndotv) * (lut.res - 1);
    const int r0 = std::min(int(std::floor(u)), lut.res - 1), c0 = std::min(int(std::floor(w)), lut.res - 1);
    const int r1 = std::min(r0 + 1, lut.res - 1), c1 = std::min(c0 + 1, lut.res - 1);
    if (r0 == r1) return {};
    const double fc = w - c0, k = double(lut.res - 1);
    auto diff = [&](auto get) {
        return k * ((1 - fc) * (get(r1, c0) - get(r0, c0)) + fc * (get(r1, c1) - get(r0, c1)));
    };
    return {diff([&](int r, int c) { return double(lut.scale(r, c)); }),
            diff([&](int r, int c) { return double(lut.bias(r, c)); })};
}

/// Analytic gradient of shade_sample (diffuse + specular, before exposure
/// and alpha) with respect to albedo, roughness and f0. Lookups are treated
/// as piecewise bilinear; derivatives vanish where an edit clamps.
inline ShadingGradients shading_gradients(const ShadingSample& s, const Vec3& view,
                                          const EnvironmentLight& env, const ShadeParams& params = {}) {
    const Vec3& n = s.normal;
    const double o_raw = s.roughness * params.roughness_scale;
    const double f_raw = s.f0 * params.f0_scale;
    const double o = saturate(o_raw), f0 = saturate(f_raw);
    const double do_dr = (o_raw > 0.0 && o_raw < 1.0) ? params.roughness_scale : 0.0;
    const double df_df = (f_raw > 0.0 && f_raw < 1.0) ? params.f0_scale : 0.0;
    const double ndotv = saturate(n.dot(view));
    const Vec3 r = reflect(n, view);

    const double e = std::exp2((-5.55473 * ndotv - 6.698316) * ndotv);
    const double ks = fresnel_ks(ndotv, o, f0);
    const bool ceiling_is_f0 = 1.0 - o < f0;
    const double dks_do = ceiling_is_f0 ? 0.0 : -e;
    const double dks_df = ceiling_is_f0 ? 1.0 : 1.0 - e;

    const LutSample lut = sample_brdf_lut(env, o, ndotv);
    const LutSample dlut = lut_roughness_derivative(env.brdf_lut, o, ndotv);
    const Vec3 pref = sample_prefiltered(env, r, o, params.env_yaw);
    const Vec3 dpref = prefiltered_roughness_derivative(env, r, o, params.env_yaw);
    const double factor = ks * lut.scale + lut.bias;
    const double dfactor = dks_do * lut.scale + ks * dlut.scale + dlut.bias;

    ShadingGradients g;
    g.d_albedo = sample_irradiance(env, n, params.env_yaw);
    g.d_roughness = (dpref * factor + pref * dfactor) * do_dr;
    g.d_f0 = pref * (dks_df * lut.scale * df_df);
    return g;
}

/// One training view: pose, camera and target image (optionally an albedo target).
struct FitFrame {
    PoseState pose;
    Camera camera;
    Image target;
    Image albedo_target;  // empty: no albedo term
};

struct FitOptions {
    LossWeights weights;
    int iterations = 500;
    double step = 0.01;
    ShadeParams shade;
    MaterialRanges ranges;
    bool fit_albedo = true;
    bool fit_roughness = true;
    bool fit_f0 = true;
    std::size_t max_points = 5000;
    std::size_t max_frames = 10;
};

/// Loss terms averaged over frames at one iteration, before its update.
struct TraceRow {
    int iteration = 0;
    LossTerms terms;
    double total = 0.0;
    double mae_star = 0.0;
};

struct FitResult {
    GaussianCloud cloud;
    std::vector<TraceRow> trace;
    std::vector<double> coverage;  // per point: summed blending weight over all frames
};

/// CSV trace. The first line records the loss weights.
inline std::string trace_csv(const std::vector<TraceRow>& trace, const LossWeights& w) {
    std::ostringstream out;
    char buf[256];
    std::snprintf(buf, sizeof buf, "# weights jaw=%.9g l1=%.9g normal=%.9g albedo=%.9g tv=%.9g\n", w.jaw,
                  w.l1, w.normal, w.albedo, w.tv);
    out << buf << "iteration,rgb,jaw,normal,albedo,tv,total,mae_star\n";
    for (const TraceRow& r : trace) {
        std::snprintf(buf, sizeof buf, "%d,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n", r.iteration, r.terms.rgb,
                      r.terms.jaw, r.terms.normal, r.terms.albedo, r.terms.tv, r.total, r.mae_star);
        out << buf;
    }
    return out.str();
}

namespace detail {

/// Geometry of one frame, fixed while materials change.
struct FitView {
    GBuffer gbuffer;  // alpha, normals, contributions from the rasterizer
    double normal_loss = 0.0;
};

/// Re-blends the material channels of a view from recorded contributions.
inline void blend_materials(const GaussianCloud& cloud, GBuffer& gb) {
    for (int y = 0; y < gb.height; ++y)
        for (int x = 0; x < gb.width; ++x) {
            Vec3 albedo = Vec3::Zero();
            double o = 0.0, f = 0.0;
            for (const Contribution& c : gb.contributions[std::size_t(y) * gb.width + x]) {
                albedo += double(c.weight) * cloud.albedo_of(c.point);
                o += double(c.weight) * cloud.roughness[c.point];
                f += double(c.weight) * cloud.f0[c.point];
            }
            for (int k = 0; k < 3; ++k) gb.albedo.at(x, y, k) = static_cast<float>(albedo[k]);
            gb.roughness.at(x, y) = static_cast<float>(o);
            gb.f0.at(x, y) = static_cast<float>(f);
        }
}

/// Divides a premultiplied map by alpha where alpha > 0.
inline Image unpremultiply(const Image& map, const Image& alpha) {
    Image out = map;
    for (int y = 0; y < map.height; ++y)
        for (int x = 0; x < map.width; ++x) {
            const double a = alpha.at(x, y);
            for (int c = 0; c < map.channels; ++c)
                out.at(x, y, c) = a > 0.0 ? static_cast<float>(map.at(x, y, c) / a) : 0.0f;
        }
    return out;
}

}  // namespace detail

/// Gradient descent on per-point albedo, roughness and f0 against target
/// frames. Geometry is fixed, so each frame is rasterized once and its
/// per-pixel blending weights reused. Each point's gradient is divided by
/// its share of the total pixel coverage so the step is in material units.
/// Attributes are clamped after every step. The trace holds one row per
/// iteration plus a final row after the last update.
inline FitResult fit_materials(const GaussianCloud& initial, const Rig& rig, const std::vector<FitFrame>& frames,
                               const EnvironmentLight& env, const FitOptions& options = {}) {
    options.weights.check();
    options.ranges.check();
    options.shade.check();
    if (initial.size() > options.max_points)
        throw std::length_error("fit_materials: " + std::to_string(initial.size()) + " points exceeds the limit of " +
                                std::to_string(options.max_points));
    if (frames.size() > options.max_frames)
        throw std::length_error("fit_materials: " + std::to_string(frames.size()) + " frames exceeds the limit of " +
                                std::to_string(options.max_frames));
    if (frames.empty()) throw std::invalid_argument("fit_materials: no frames");
    if (options.iterations < 0 || !(options.step >= 0.0))
        throw std::invalid_argument("fit_materials: iterations and step must be >= 0");

    const std::size_t N = initial.size(), F = frames.size();
    const LossWeights& w = options.weights;
    std::vector<detail::FitView> views(F);
    for (std::size_t f = 0; f < F; ++f) {
        const FitFrame& fr = frames[f];
        if (fr.target.width != fr.camera.width || fr.target.height != fr.camera.height || fr.target.channels != 3)
            throw std::invalid_argument("fit_materials: target " + std::to_string(f) + " does not match its camera");
        const GaussianCloud posed = pose_cloud(initial, rig, fr.pose);
        RasterOptions ro;
        ro.record_contributions = true;
        views[f].gbuffer = rasterize(posed, fr.camera, ro);
        const GBuffer& gb = views[f].gbuffer;
        const Image depth_normals = normals_from_depth(gb.depth, gb.alpha, fr.camera);
        views[f].normal_loss = l_normal(gb.normal, depth_normals, gb.alpha).value;
    }

    std::vector<double> coverage(N, 0.0);
    double total_pixels = 0.0;
    for (const auto& v : views) {
        total_pixels += double(v.gbuffer.width) * v.gbuffer.height;
        for (const auto& px : v.gbuffer.contributions)
            for (const Contribution& c : px) coverage[c.point] += c.weight;
    }

    FitResult result;
    result.cloud = initial;
    result.coverage = coverage;
    GaussianCloud& cloud = result.cloud;

    struct FrameEval {
        LossTerms terms;
        double mae_star = 0.0;
        std::vector<double> g_albedo, g_roughness, g_f0;
    };

    auto evaluate = [&](bool want_gradient) {
        std::vector<FrameEval> evals(F);
        parallel_for(0, F, [&](std::size_t f) {
            FrameEval& ev = evals[f];
            GBuffer& gb = views[f].gbuffer;
            const FitFrame& fr = frames[f];
            detail::blend_materials(cloud, gb);
            const Image color = shade(gb, fr.camera, env, options.shade);
            const Image roughness = detail::unpremultiply(gb.roughness, gb.alpha);
            const Image albedo = detail::unpremultiply(gb.albedo, gb.alpha);
            ev.terms.rgb = l_rgb(color, fr.target, w.l1);
            ev.terms.normal = views[f].normal_loss;
            ev.terms.tv = tv(roughness, gb.alpha).value;
            if (!fr.albedo_target.data.empty()) ev.terms.albedo = l_albedo(albedo, fr.albedo_target, gb.alpha).value;
            ev.mae_star = mae_star(color, fr.target);
            if (!want_gradient) return;

            ev.g_albedo.assign(3 * N, 0.0);
            ev.g_roughness.assign(N, 0.0);
            ev.g_f0.assign(N, 0.0);
            const Image d_color = l_rgb_gradient(color, fr.target, w.l1);
            const Image d_tv = w.tv > 0.0 ? tv_gradient(roughness, gb.alpha) : Image(gb.width, gb.height, 1);
            const bool use_albedo = !fr.albedo_target.data.empty() && w.albedo > 0.0;
            std::size_t albedo_count = 0;
            if (use_albedo)
                for (float a : gb.alpha.data) albedo_count += a > kMaskThreshold;
            for (int y = 0; y < gb.height; ++y)
                for (int x = 0; x < gb.width; ++x) {
                    const double a = gb.alpha.at(x, y);
                    if (!(a > 0.0)) continue;
                    const ShadingSample s = gbuffer_sample(gb, x, y);
                    const ShadingGradients sg = shading_gradients(s, -fr.camera.pixel_ray(x, y), env, options.shade);
                    // Loss gradient w.r.t. the unpremultiplied pixel materials, times alpha.
                    const Vec3 dc(d_color.at(x, y, 0), d_color.at(x, y, 1), d_color.at(x, y, 2));
                    const double k = options.shade.exposure * a;
                    Vec3 g_alb = k * dc.cwiseProduct(sg.d_albedo);
                    double g_o = k * dc.dot(sg.d_roughness) + w.tv * d_tv.at(x, y);
                    const double g_f = k * dc.dot(sg.d_f0);
                    if (use_albedo && a > kMaskThreshold && albedo_count > 0) {
                        for (int c = 0; c < 3; ++c) {
                            const double d = double(albedo.at(x, y, c)) - double(fr.albedo_target.at(x, y, c));
                            g_alb[c] += w.albedo * double((d > 0) - (d < 0)) / double(3 * albedo_count);
                        }
                    }
                    // Pixel material = sum_i w_i m_i / alpha.
                    for (const Contribution& c : gb.contributions[std::size_t(y) * gb.width + x]) {
                        const double share = double(c.weight) / a;
                        for (int ch = 0; ch < 3; ++ch) ev.g_albedo[3 * c.point + ch] += share * g_alb[ch];
                        ev.g_roughness[c.point] += share * g_o;
                        ev.g_f0[c.point] += share * g_f;
                    }
                }
        });
        return evals;
    };

    auto record = [&](int iteration, const std::vector<FrameEval>& evals) {
        TraceRow row;
        row.iteration = iteration;
        for (const FrameEval& ev : evals) {
            row.terms.rgb += ev.terms.rgb / double(F);
            row.terms.normal += ev.terms.normal / double(F);
            row.terms.albedo += ev.terms.albedo / double(F);
            row.terms.tv += ev.terms.tv / double(F);
            row.mae_star += ev.mae_star / double(F);
        }
        row.total = total_loss(row.terms, w).total;
        result.trace.push_back(row);
    };

    for (int it = 0; it < options.iterations; ++it) {
        const std::vector<FrameEval> evals = evaluate(true);
        record(it, evals);
        for (std::size_t i = 0; i < N; ++i) {
            if (!(coverage[i] > 0.0)) continue;
            // The loss is a frame mean of pixel means; rescale by the
            // point's share of all pixels.
            const double precond = total_pixels / coverage[i] / double(F);
            double ga[3] = {0, 0, 0}, go = 0.0, gf = 0.0;
            for (const FrameEval& ev : evals) {
                for (int c = 0; c < 3; ++c) ga[c] += ev.g_albedo[3 * i + c];
                go += ev.g_roughness[i];
                gf += ev.g_f0[i];
            }
            if (options.fit_albedo)
                for (int c = 0; c < 3; ++c)
                    cloud.albedo[3 * i + c] = static_cast<float>(
                        saturate(cloud.albedo[3 * i + c] - options.step * precond * ga[c]));
            if (options.fit_roughness)
                cloud.roughness[i] = static_cast<float>(cloud.roughness[i] - options.step * precond * go);
            if (options.fit_f0) cloud.f0[i] = static_cast<float>(cloud.f0[i] - options.step * precond * gf);
        }
        cloud = clamp_materials(std::move(cloud), options.ranges);
    }
    record(options.iterations, evaluate(false));
    return result;
}

}  // namespace gsav
