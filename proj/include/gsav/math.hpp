// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>

namespace gsav {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat34 = Eigen::Matrix<double, 3, 4>;
using Quat = Eigen::Quaterniond;

inline constexpr double kPi = 3.14159265358979323846;

inline double saturate(double x) { return std::clamp(x, 0.0, 1.0); }

inline double smoothstep(double edge0, double edge1, double x) {
    const double t = saturate((x - edge0) / (edge1 - edge0));
    return t * t * (3.0 - 2.0 * t);
}

inline Mat3 skew(const Vec3& v) {
    Mat3 k;
    k << 0.0, -v.z(), v.y(),
         v.z(), 0.0, -v.x(),
         -v.y(), v.x(), 0.0;
    return k;
}

/// Rotation about +y, the world up axis used for environment yaw.
inline Mat3 rotation_y(double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    Mat3 r;
    r << c, 0.0, s,
         0.0, 1.0, 0.0,
         -s, 0.0, c;
    return r;
}

/// Applies a 3x4 rigid (or affine) transform to a point.
inline Vec3 transform_point(const Mat34& m, const Vec3& p) {
    return m.leftCols<3>() * p + m.col(3);
}

/// Composes two 3x4 transforms as 4x4 matrices: (a * b)(x) = a(b(x)).
inline Mat34 compose(const Mat34& a, const Mat34& b) {
    Mat34 out;
    out.leftCols<3>() = a.leftCols<3>() * b.leftCols<3>();
    out.col(3) = a.leftCols<3>() * b.col(3) + a.col(3);
    return out;
}

inline Mat34 identity_transform() {
    Mat34 m = Mat34::Zero();
    m.leftCols<3>().setIdentity();
    return m;
}

/// Builds an orthonormal frame around a unit vector; returns (tangent, bitangent).
inline std::pair<Vec3, Vec3> orthonormal_basis(const Vec3& n) {
    // Branchless construction (Duff et al. 2017).
    const double sign = std::copysign(1.0, n.z());
    const double a = -1.0 / (sign + n.z());
    const double b = n.x() * n.y() * a;
    Vec3 t(1.0 + sign * n.x() * n.x() * a, sign * b, -sign * n.x());
    Vec3 bt(b, sign + n.y() * n.y() * a, -n.y());
    return {t, bt};
}

}  // namespace gsav
