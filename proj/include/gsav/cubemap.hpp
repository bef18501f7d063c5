// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gsav/math.hpp"

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace gsav {

/// Six-face linear RGB cube map.
///
/// Face order is +x, -x, +y, -y, +z, -z. Within a face, texel (i, j) has
/// column i and row j, with face coordinates
///   s = 2 (i + 0.5) / res - 1,  t = 2 (j + 0.5) / res - 1
/// and directions (before normalization)
///   +x: ( 1, -t, -s)   -x: (-1, -t,  s)
///   +y: ( s,  1,  t)   -y: ( s, -1, -t)
///   +z: ( s, -t,  1)   -z: (-s, -t, -1)
/// which is the usual OpenGL layout.
struct Cubemap {
    int res = 0;
    std::vector<float> data;  // [6][res][res][3]

    Cubemap() = default;
    explicit Cubemap(int resolution, float fill = 0.0f) : res(resolution) {
        if (resolution < 1) throw std::invalid_argument("Cubemap: resolution must be >= 1");
        data.assign(std::size_t(6) * resolution * resolution * 3, fill);
    }

    std::size_t index(int face, int i, int j) const {
        return ((std::size_t(face) * res + j) * res + i) * 3;
    }
    Vec3 texel(int face, int i, int j) const {
        const std::size_t k = index(face, i, j);
        return {data[k], data[k + 1], data[k + 2]};
    }
    void set_texel(int face, int i, int j, const Vec3& v) {
        const std::size_t k = index(face, i, j);
        for (int c = 0; c < 3; ++c) data[k + c] = static_cast<float>(v[c]);
    }
    std::size_t texel_count() const { return std::size_t(6) * res * res; }

    bool operator==(const Cubemap&) const = default;
};

/// Direction (unnormalized) for face coordinates s, t in [-1, 1].
inline Vec3 cube_face_direction(int face, double s, double t) {
    switch (face) {
        case 0: return {1.0, -t, -s};
        case 1: return {-1.0, -t, s};
        case 2: return {s, 1.0, t};
        case 3: return {s, -1.0, -t};
        case 4: return {s, -t, 1.0};
        default: return {-s, -t, -1.0};
    }
}

inline Vec3 cube_texel_direction(int face, int i, int j, int res) {
    const double s = 2.0 * (i + 0.5) / res - 1.0;
    const double t = 2.0 * (j + 0.5) / res - 1.0;
    return cube_face_direction(face, s, t).normalized();
}

struct CubeCoord {
    int face;
    double s;  // [-1, 1]
    double t;  // [-1, 1]
};

/// Inverse of cube_face_direction: picks the major axis of d.
inline CubeCoord cube_coord(const Vec3& d) {
    const double ax = std::abs(d.x()), ay = std::abs(d.y()), az = std::abs(d.z());
    if (ax >= ay && ax >= az) {
        if (d.x() > 0) return {0, -d.z() / ax, -d.y() / ax};
        return {1, d.z() / ax, -d.y() / ax};
    }
    if (ay >= az) {
        if (d.y() > 0) return {2, d.x() / ay, d.z() / ay};
        return {3, d.x() / ay, -d.z() / ay};
    }
    if (d.z() > 0) return {4, d.x() / az, -d.y() / az};
    return {5, -d.x() / az, -d.y() / az};
}

/// Exact solid angle of a cube texel.
inline double cube_texel_solid_angle(int i, int j, int res) {
    auto area = [](double x, double y) { return std::atan2(x * y, std::sqrt(x * x + y * y + 1.0)); };
    const double x0 = 2.0 * i / res - 1.0, x1 = 2.0 * (i + 1) / res - 1.0;
    const double y0 = 2.0 * j / res - 1.0, y1 = 2.0 * (j + 1) / res - 1.0;
    return area(x0, y0) - area(x0, y1) - area(x1, y0) + area(x1, y1);
}

/// Nearest texel of the face that contains direction d.
inline Vec3 cube_fetch_nearest(const Cubemap& cube, const Vec3& d) {
    const CubeCoord c = cube_coord(d);
    const int i = std::clamp(int(std::floor((c.s + 1.0) * 0.5 * cube.res)), 0, cube.res - 1);
    const int j = std::clamp(int(std::floor((c.t + 1.0) * 0.5 * cube.res)), 0, cube.res - 1);
    return cube.texel(c.face, i, j);
}

/// Bilinear cube map lookup. Taps that fall past a face edge are resolved
/// by re-projecting the extended texel center onto the neighbouring face,
/// so filtering stays continuous across seams.
inline Vec3 cube_sample(const Cubemap& cube, const Vec3& dir) {
    const int res = cube.res;
    const CubeCoord c = cube_coord(dir);
    const double u = (c.s + 1.0) * 0.5 * res - 0.5;
    const double v = (c.t + 1.0) * 0.5 * res - 0.5;
    const int i0 = int(std::floor(u));
    const int j0 = int(std::floor(v));
    const double fu = u - i0, fv = v - j0;

    auto tap = [&](int i, int j) -> Vec3 {
        if (i >= 0 && i < res && j >= 0 && j < res) return cube.texel(c.face, i, j);
        const double s = 2.0 * (i + 0.5) / res - 1.0;
        const double t = 2.0 * (j + 0.5) / res - 1.0;
        return cube_fetch_nearest(cube, cube_face_direction(c.face, s, t));
    };
    return (1 - fu) * (1 - fv) * tap(i0, j0) + fu * (1 - fv) * tap(i0 + 1, j0) +
           (1 - fu) * fv * tap(i0, j0 + 1) + fu * fv * tap(i0 + 1, j0 + 1);
}

/// Fills a cube map from a direction -> radiance function, one value per texel center.
template <typename Fn>
Cubemap make_cubemap(int res, Fn&& radiance) {
    Cubemap cube(res);
    for (int f = 0; f < 6; ++f)
        for (int j = 0; j < res; ++j)
            for (int i = 0; i < res; ++i)
                cube.set_texel(f, i, j, radiance(cube_texel_direction(f, i, j, res)));
    return cube;
}

/// Rotates the environment about +y: out(d) = in(R_y(-yaw) d).
inline Cubemap rotate_yaw(const Cubemap& cube, double yaw) {
    const Mat3 r = rotation_y(-yaw);
    return make_cubemap(cube.res, [&](const Vec3& d) { return cube_sample(cube, r * d); });
}

/// Box-filters a cube map down by a factor of two per step until res <= max_res.
inline Cubemap downsample_to(const Cubemap& cube, int max_res) {
    Cubemap cur = cube;
    while (cur.res > max_res && cur.res % 2 == 0) {
        Cubemap next(cur.res / 2);
        for (int f = 0; f < 6; ++f)
            for (int j = 0; j < next.res; ++j)
                for (int i = 0; i < next.res; ++i) {
                    const Vec3 sum = cur.texel(f, 2 * i, 2 * j) + cur.texel(f, 2 * i + 1, 2 * j) +
                                     cur.texel(f, 2 * i, 2 * j + 1) +
                                     cur.texel(f, 2 * i + 1, 2 * j + 1);
                    next.set_texel(f, i, j, 0.25 * sum);
                }
        cur = std::move(next);
    }
    return cur;
}

}  // namespace gsav
