// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gsav/camera.hpp"
#include "gsav/cloud.hpp"
#include "gsav/deform.hpp"
#include "gsav/light.hpp"
#include "gsav/pose.hpp"
#include "gsav/rasterize.hpp"
#include "gsav/rig.hpp"
#include "gsav/shade.hpp"

#include <chrono>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace gsav::cli {

struct StageTimings {
    double deform = 0.0;  // seconds
    double rasterize = 0.0;
    double shade = 0.0;
};

struct Frame {
    GBuffer gbuffer;
    ShadedImage layers;
    Image color;  // layers.color over the background
};

/// Parses "black", "white", "gray" or "r,g,b" (linear values).
inline Vec3 parse_background(const std::string& s) {
    if (s == "black") return Vec3::Zero();
    if (s == "white") return Vec3::Ones();
    if (s == "gray" || s == "grey") return Vec3::Constant(0.5);
    double r = 0, g = 0, b = 0;
    char tail = 0;
    if (std::sscanf(s.c_str(), "%lf,%lf,%lf%c", &r, &g, &b, &tail) == 3 && r >= 0 && g >= 0 && b >= 0)
        return {r, g, b};
    throw std::invalid_argument("background must be black, white, gray or r,g,b; got '" + s + "'");
}

/// Deform, rasterize, shade, then composite over a constant background.
inline Frame render_frame(const GaussianCloud& cloud, const Rig& rig, const PoseState& pose, const Camera& cam,
                          const EnvironmentLight& env, const ShadeParams& params, const Vec3& background,
                          StageTimings* timings = nullptr) {
    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    const GaussianCloud posed = pose_cloud(cloud, rig, pose);
    const auto t1 = clock::now();
    Frame f;
    f.gbuffer = rasterize(posed, cam);
    const auto t2 = clock::now();
    f.layers = shade_layers(f.gbuffer, cam, env, params);
    f.color = f.layers.color;
    if (background != Vec3::Zero())
        for (int y = 0; y < cam.height; ++y)
            for (int x = 0; x < cam.width; ++x) {
                const double t = 1.0 - f.gbuffer.alpha.at(x, y);
                for (int c = 0; c < 3; ++c)
                    f.color.at(x, y, c) = static_cast<float>(f.color.at(x, y, c) + t * background[c]);
            }
    const auto t3 = clock::now();
    if (timings) {
        timings->deform += std::chrono::duration<double>(t1 - t0).count();
        timings->rasterize += std::chrono::duration<double>(t2 - t1).count();
        timings->shade += std::chrono::duration<double>(t3 - t2).count();
    }
    return f;
}

/// Mean Rec. 709 luminance of an RGB image.
inline double mean_luminance(const Image& img) {
    if (img.channels != 3) throw std::invalid_argument("mean_luminance: RGB image required");
    if (img.pixel_count() == 0) return 0.0;
    double sum = 0.0;
    for (std::size_t p = 0; p < img.pixel_count(); ++p)
        sum += 0.2126 * img.data[3 * p] + 0.7152 * img.data[3 * p + 1] + 0.0722 * img.data[3 * p + 2];
    return sum / double(img.pixel_count());
}

}  // namespace gsav::cli
