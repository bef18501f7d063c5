// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gsav/math.hpp"

#include <cmath>
#include <stdexcept>

namespace gsav {

/// Pinhole camera. Camera space follows the vision convention: +x right,
/// +y down, +z forward. Pixel (x, y) has its center at (x + 0.5, y + 0.5).
struct Camera {
    int width = 0;
    int height = 0;
    double fx = 1.0, fy = 1.0, cx = 0.0, cy = 0.0;
    Mat34 world_to_camera = identity_transform();
    double near = 0.01;
    double far = 100.0;

    void check() const {
        if (width <= 0 || height <= 0) throw std::invalid_argument("Camera: empty resolution");
        if (!(fx > 0.0) || !(fy > 0.0)) throw std::invalid_argument("Camera: fx, fy must be > 0");
        if (!(near > 0.0) || !(near < far))
            throw std::invalid_argument("Camera: require 0 < near < far");
    }

    Mat3 rotation() const { return world_to_camera.leftCols<3>(); }
    Vec3 translation() const { return world_to_camera.col(3); }
    Vec3 center() const { return -rotation().transpose() * translation(); }

    Vec3 to_camera(const Vec3& world) const { return transform_point(world_to_camera, world); }

    /// Unit world-space direction of the ray through a pixel center.
    Vec3 pixel_ray(int x, int y) const {
        const Vec3 d((x + 0.5 - cx) / fx, (y + 0.5 - cy) / fy, 1.0);
        return (rotation().transpose() * d).normalized();
    }

    bool operator==(const Camera&) const = default;
};

/// Orbit parameters around a target, y-up world. azimuth 0 places the
/// camera on +z looking toward -z.
struct Orbit {
    double azimuth = 0.0;    // radians
    double elevation = 0.0;  // radians
    double distance = 4.0;
};

inline Camera look_at(const Vec3& eye, const Vec3& target, int width, int height,
                      double fov_y_radians, const Vec3& up = Vec3::UnitY()) {
    const Vec3 forward = (target - eye).normalized();
    Vec3 right = forward.cross(up);
    if (right.norm() < 1e-12) right = forward.cross(Vec3::UnitZ());
    right.normalize();
    const Vec3 down = forward.cross(right);

    Camera cam;
    cam.width = width;
    cam.height = height;
    cam.fy = 0.5 * height / std::tan(0.5 * fov_y_radians);
    cam.fx = cam.fy;
    cam.cx = 0.5 * width;
    cam.cy = 0.5 * height;
    Mat3 r;
    r.row(0) = right.transpose();
    r.row(1) = down.transpose();
    r.row(2) = forward.transpose();
    cam.world_to_camera.leftCols<3>() = r;
    cam.world_to_camera.col(3) = -r * eye;
    return cam;
}

inline Camera orbit_camera(const Orbit& orbit, const Vec3& target, int width, int height,
                           double fov_y_radians = 30.0 * kPi / 180.0) {
    const double ce = std::cos(orbit.elevation);
    const Vec3 offset(ce * std::sin(orbit.azimuth), std::sin(orbit.elevation),
                      ce * std::cos(orbit.azimuth));
    return look_at(target + orbit.distance * offset, target, width, height, fov_y_radians);
}

}  // namespace gsav
