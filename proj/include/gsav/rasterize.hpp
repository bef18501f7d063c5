// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gsav/camera.hpp"
#include "gsav/cloud.hpp"
#include "gsav/gbuffer.hpp"
#include "gsav/math.hpp"
#include "gsav/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <vector>

namespace gsav {

inline constexpr int kTileSize = 16;
inline constexpr double kDilation = 0.3;          // px^2 added to the 2D covariance diagonal
inline constexpr double kMaxSigma = 0.99;         // per-splat opacity clamp
inline constexpr double kMinTransmittance = 1e-4; // front-to-back termination
inline constexpr double kSupportPower = 4.5;      // 0.5 * 3^2: the 3-sigma ellipse

/// Screen-space footprint of one Gaussian.
struct ProjectedGaussian {
    Vec2 mean;          // pixels
    Mat2 cov;           // includes the dilation
    Vec3 conic;         // inverse covariance (a, b, c) for [[a, b], [b, c]]
    double depth = 0.0; // camera z
    double radius = 0.0;
    std::uint32_t index = 0;
};

/// Sigma = R S S^T R^T.
inline Mat3 covariance3d(const Quat& rotation, const Vec3& scale) {
    const Mat3 r = rotation.normalized().toRotationMatrix();
    const Mat3 m = r * scale.asDiagonal();
    return m * m.transpose();
}

/// Perspective projection of a 3D Gaussian (EWA splatting with the local
/// affine approximation). Returns nullopt when the point is outside the
/// depth range or its 3-sigma square misses the image.
inline std::optional<ProjectedGaussian> project(const Vec3& position, const Mat3& cov3d,
                                                const Camera& cam, std::uint32_t index = 0) {
    const Vec3 p = cam.to_camera(position);
    if (!(p.z() > cam.near) || !(p.z() < cam.far)) return std::nullopt;

    const double inv_z = 1.0 / p.z();
    Eigen::Matrix<double, 2, 3> jac;
    jac << cam.fx * inv_z, 0.0, -cam.fx * p.x() * inv_z * inv_z,
           0.0, cam.fy * inv_z, -cam.fy * p.y() * inv_z * inv_z;
    const Eigen::Matrix<double, 2, 3> t = jac * cam.rotation();

    ProjectedGaussian g;
    g.index = index;
    g.depth = p.z();
    g.mean = Vec2(cam.fx * p.x() * inv_z + cam.cx, cam.fy * p.y() * inv_z + cam.cy);
    g.cov = t * cov3d * t.transpose();
    g.cov(0, 0) += kDilation;
    g.cov(1, 1) += kDilation;

    const double a = g.cov(0, 0), b = g.cov(0, 1), c = g.cov(1, 1);
    const double det = a * c - b * b;
    if (!(det > 0.0)) return std::nullopt;
    g.conic = Vec3(c / det, -b / det, a / det);

    const double mid = 0.5 * (a + c);
    const double half_diff = 0.5 * (a - c);
    const double lambda_max = mid + std::sqrt(half_diff * half_diff + b * b);
    g.radius = 3.0 * std::sqrt(lambda_max);

    if (g.mean.x() + g.radius < 0.0 || g.mean.x() - g.radius > cam.width ||
        g.mean.y() + g.radius < 0.0 || g.mean.y() - g.radius > cam.height)
        return std::nullopt;
    return g;
}

/// 0.5 d^T Sigma^-1 d for d = pixel - mean.
inline double gaussian_power(const Vec2& pixel, const ProjectedGaussian& g) {
    const Vec2 d = pixel - g.mean;
    return 0.5 * (g.conic.x() * d.x() * d.x() + 2.0 * g.conic.y() * d.x() * d.y() +
                  g.conic.z() * d.y() * d.y());
}

inline double gaussian_weight(const Vec2& pixel, const ProjectedGaussian& g) {
    return std::exp(-gaussian_power(pixel, g));
}

/// The Gaussian's shortest axis in world space, flipped to face the camera.
/// Ties go to the lowest axis index.
inline Vec3 point_normal(const Quat& rotation, const Vec3& scale, const Vec3& to_camera) {
    int axis = 0;
    for (int k = 1; k < 3; ++k)
        if (scale[k] < scale[axis]) axis = k;
    Vec3 n = rotation.normalized().toRotationMatrix().col(axis);
    if (n.dot(to_camera) < 0.0) n = -n;
    return n;
}

struct RasterOptions {
    ChannelSet channels = ChannelSet::all();
    bool record_contributions = false;
};

namespace detail {

struct SplatPayload {
    Vec3 albedo;
    Vec3 normal;
    double roughness;
    double f0;
    double opacity;
};

struct PixelAccum {
    Vec3 albedo = Vec3::Zero();
    Vec3 normal = Vec3::Zero();
    double roughness = 0.0;
    double f0 = 0.0;
    double depth = 0.0;
    double transmittance = 1.0;
};

inline void store_pixel(GBuffer& out, int x, int y, const PixelAccum& acc, const ChannelSet& ch) {
    const double alpha = 1.0 - acc.transmittance;
    out.alpha.at(x, y) = static_cast<float>(alpha);
    if (ch.has(Channel::Albedo))
        for (int c = 0; c < 3; ++c) out.albedo.at(x, y, c) = static_cast<float>(acc.albedo[c]);
    if (ch.has(Channel::Roughness)) out.roughness.at(x, y) = static_cast<float>(acc.roughness);
    if (ch.has(Channel::F0)) out.f0.at(x, y) = static_cast<float>(acc.f0);
    if (ch.has(Channel::Depth)) out.depth.at(x, y) = static_cast<float>(acc.depth);
    if (ch.has(Channel::Normal)) {
        Vec3 n = acc.normal;
        const double len = n.norm();
        if (alpha > 0.5 && len > 0.0) n /= len;
        for (int c = 0; c < 3; ++c) out.normal.at(x, y, c) = static_cast<float>(n[c]);
    }
}

}  // namespace detail

/// Splats a posed cloud into a G-buffer.
///
/// Gaussians are binned into 16x16 tiles by their 3-sigma square and blended
/// front to back in ascending depth (ties by point index). A Gaussian
/// contributes to a pixel only inside its 3-sigma ellipse; sigma is clamped
/// to 0.99 and a pixel stops once transmittance would drop below 1e-4. The
/// background is black.
inline GBuffer rasterize(const GaussianCloud& cloud, const Camera& cam,
                         const RasterOptions& options = {}) {
    cam.check();
    const ChannelSet ch = options.channels;
    const std::size_t N = cloud.size();
    GBuffer out(cam.width, cam.height);
    if (options.record_contributions) out.contributions.resize(std::size_t(cam.width) * cam.height);

    std::vector<std::optional<ProjectedGaussian>> projected(N);
    std::vector<detail::SplatPayload> payload(N);
    const Vec3 eye = cam.center();
    parallel_for(0, N, [&](std::size_t i) {
        const Vec3 pos = cloud.position(i);
        const Quat q = cloud.rotation(i);
        const Vec3 s = cloud.scale(i);
        projected[i] = project(pos, covariance3d(q, s), cam, std::uint32_t(i));
        if (!projected[i]) return;
        detail::SplatPayload& p = payload[i];
        p.albedo = cloud.albedo_of(i);
        p.roughness = cloud.roughness[i];
        p.f0 = cloud.f0[i];
        p.opacity = cloud.opacities[i];
        p.normal = ch.has(Channel::Normal) ? point_normal(q, s, eye - pos) : Vec3::Zero();
    }, 512);

    std::vector<std::uint32_t> order;
    order.reserve(N);
    for (std::size_t i = 0; i < N; ++i)
        if (projected[i]) order.push_back(std::uint32_t(i));
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        const double da = projected[a]->depth, db = projected[b]->depth;
        return da < db || (da == db && a < b);
    });

    const int tiles_x = (cam.width + kTileSize - 1) / kTileSize;
    const int tiles_y = (cam.height + kTileSize - 1) / kTileSize;
    std::vector<std::vector<std::uint32_t>> bins(std::size_t(tiles_x) * tiles_y);
    for (std::uint32_t i : order) {
        const ProjectedGaussian& g = *projected[i];
        const int x0 = std::max(0, int(std::floor((g.mean.x() - g.radius) / kTileSize)));
        const int x1 = std::min(tiles_x - 1, int(std::floor((g.mean.x() + g.radius) / kTileSize)));
        const int y0 = std::max(0, int(std::floor((g.mean.y() - g.radius) / kTileSize)));
        const int y1 = std::min(tiles_y - 1, int(std::floor((g.mean.y() + g.radius) / kTileSize)));
        for (int ty = y0; ty <= y1; ++ty)
            for (int tx = x0; tx <= x1; ++tx) bins[std::size_t(ty) * tiles_x + tx].push_back(i);
    }

    parallel_for(0, bins.size(), [&](std::size_t tile) {
        const int tx = int(tile % tiles_x), ty = int(tile / tiles_x);
        const std::vector<std::uint32_t>& list = bins[tile];
        for (int y = ty * kTileSize; y < std::min(cam.height, (ty + 1) * kTileSize); ++y) {
            for (int x = tx * kTileSize; x < std::min(cam.width, (tx + 1) * kTileSize); ++x) {
                const Vec2 pixel(x + 0.5, y + 0.5);
                detail::PixelAccum acc;
                std::vector<Contribution>* record =
                    options.record_contributions ? &out.contributions[std::size_t(y) * cam.width + x]
                                                 : nullptr;
                for (std::uint32_t i : list) {
                    const ProjectedGaussian& g = *projected[i];
                    const double power = gaussian_power(pixel, g);
                    if (power > kSupportPower) continue;
                    const detail::SplatPayload& p = payload[i];
                    const double sigma = std::min(kMaxSigma, p.opacity * std::exp(-power));
                    const double next_t = acc.transmittance * (1.0 - sigma);
                    if (next_t < kMinTransmittance) break;
                    const double w = sigma * acc.transmittance;
                    acc.albedo += w * p.albedo;
                    acc.roughness += w * p.roughness;
                    acc.f0 += w * p.f0;
                    acc.normal += w * p.normal;
                    acc.depth += w * g.depth;
                    acc.transmittance = next_t;
                    if (record) record->push_back({i, static_cast<float>(w)});
                }
                detail::store_pixel(out, x, y, acc, ch);
            }
        }
    });
    return out;
}

/// Normals from a blended depth map: back-project pixels (depth / alpha),
/// take the cross product of central differences, orient toward the camera
/// and rotate to world space. Pixels whose 4-neighbourhood is not fully
/// covered (alpha >= 0.5) get a zero normal.
inline Image normals_from_depth(const Image& depth, const Image& alpha, const Camera& cam) {
    require_same_shape(depth, alpha, "normals_from_depth");
    const int w = depth.width, h = depth.height;
    Image out(w, h, 3);
    auto valid = [&](int x, int y) {
        return x >= 0 && y >= 0 && x < w && y < h && alpha.at(x, y) >= 0.5f;
    };
    auto point = [&](int x, int y) {
        const double z = double(depth.at(x, y)) / double(alpha.at(x, y));
        return Vec3((x + 0.5 - cam.cx) / cam.fx * z, (y + 0.5 - cam.cy) / cam.fy * z, z);
    };
    const Mat3 cam_to_world = cam.rotation().transpose();
    parallel_for(0, std::size_t(h), [&](std::size_t row) {
        const int y = int(row);
        for (int x = 0; x < w; ++x) {
            if (!valid(x, y) || !valid(x - 1, y) || !valid(x + 1, y) || !valid(x, y - 1) ||
                !valid(x, y + 1))
                continue;
            const Vec3 dx = 0.5 * (point(x + 1, y) - point(x - 1, y));
            const Vec3 dy = 0.5 * (point(x, y + 1) - point(x, y - 1));
            Vec3 n = dx.cross(dy);
            const double len = n.norm();
            if (!(len > 0.0)) continue;
            n /= len;
            if (n.dot(-point(x, y)) < 0.0) n = -n;
            const Vec3 nw = cam_to_world * n;
            for (int c = 0; c < 3; ++c) out.at(x, y, c) = static_cast<float>(nw[c]);
        }
    });
    return out;
}

}  // namespace gsav
