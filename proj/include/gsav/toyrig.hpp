// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gsav/camera.hpp"
#include "gsav/cloud.hpp"
#include "gsav/deform.hpp"
#include "gsav/envlight.hpp"
#include "gsav/image.hpp"
#include "gsav/io/animation.hpp"
#include "gsav/math.hpp"
#include "gsav/pose.hpp"
#include "gsav/rig.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gsav::toy {

/// Joint indices of the toy head.
enum ToyJoint : int { kRoot = 0, kNeck = 1, kJaw = 2, kLeftEye = 3, kRightEye = 4 };

/// Expression slots with fixed meaning; the rest are seeded bumps.
inline constexpr std::size_t kJawOpenAssist = 0;
inline constexpr std::size_t kBlink = 1;

struct ToyRigSpec {
    int subdivisions = 3;  // skull icosphere level
    int eye_subdivisions = 1;
    Vec3 skull_radii{0.8, 1.0, 0.9};
    Vec3 jaw_hinge{0.0, -0.15, 0.1};
    Vec3 jaw_axis{1.0, 0.0, 0.0};
    double jaw_falloff = 0.3;  // height below the hinge over which jaw weight ramps to 1
    Vec3 neck{0.0, -0.7, -0.1};
    std::array<Vec3, 2> eye_centers{Vec3(0.3, 0.15, 0.76), Vec3(-0.3, 0.15, 0.76)};
    double eye_radius = 0.12;
    std::size_t num_shape = 4;
    std::size_t num_expr = 4;
    std::uint64_t seed = 0;

    void check() const {
        if (subdivisions < 0 || subdivisions > 6 || eye_subdivisions < 0 || eye_subdivisions > 5)
            throw std::invalid_argument("ToyRigSpec: subdivision level out of range");
        if (num_shape < 1) throw std::invalid_argument("ToyRigSpec: num_shape must be >= 1");
        if (num_expr < 2) throw std::invalid_argument("ToyRigSpec: num_expr must be >= 2 (jaw assist, blink)");
        if (!(skull_radii.minCoeff() > 0.0) || !(eye_radius > 0.0) || !(jaw_falloff > 0.0))
            throw std::invalid_argument("ToyRigSpec: radii must be > 0");
        if (!(jaw_axis.norm() > 0.0)) throw std::invalid_argument("ToyRigSpec: zero jaw axis");
    }
};

/// Unit icosphere: vertices on the sphere, counter-clockwise faces seen from outside.
inline std::pair<std::vector<Vec3>, std::vector<std::array<std::uint32_t, 3>>> icosphere(int level) {
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> v = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                           {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
    for (Vec3& p : v) p.normalize();
    std::vector<std::array<std::uint32_t, 3>> f = {
        {0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
        {11, 10, 2}, {10, 7, 6}, {7, 1, 8}, {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8},
        {3, 8, 9}, {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1}};
    for (int l = 0; l < level; ++l) {
        std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> mid;
        auto midpoint = [&](std::uint32_t a, std::uint32_t b) {
            const auto key = std::minmax(a, b);
            const auto it = mid.find(key);
            if (it != mid.end()) return it->second;
            v.push_back((v[a] + v[b]).normalized());
            const auto idx = std::uint32_t(v.size() - 1);
            mid.emplace(key, idx);
            return idx;
        };
        std::vector<std::array<std::uint32_t, 3>> next;
        next.reserve(f.size() * 4);
        for (const auto& tri : f) {
            const std::uint32_t a = midpoint(tri[0], tri[1]), b = midpoint(tri[1], tri[2]),
                                c = midpoint(tri[2], tri[0]);
            next.push_back({tri[0], a, c});
            next.push_back({tri[1], b, a});
            next.push_back({tri[2], c, b});
            next.push_back({a, b, c});
        }
        f = std::move(next);
    }
    return {v, f};
}

/// Raised-cosine bump of radius r centered at c: 1 at c, 0 beyond r.
inline double cosine_bump(const Vec3& p, const Vec3& c, double r) {
    const double d = (p - c).norm();
    return d >= r ? 0.0 : 0.5 * (1.0 + std::cos(kPi * d / r));
}

/// Weight of the jaw joint at a skull vertex: zero at and above the hinge
/// height, ramping smoothly to 1 below it, and only on the front half.
inline double jaw_weight(const ToyRigSpec& spec, const Vec3& p) {
    const double below = spec.jaw_hinge.y() - p.y();
    if (below <= 0.0) return 0.0;
    return smoothstep(0.0, spec.jaw_falloff, below) * smoothstep(-0.3, 0.2, p.z());
}

inline double neck_weight(const ToyRigSpec& spec, const Vec3& p) {
    return 0.6 * smoothstep(spec.neck.y() + 0.1, spec.neck.y() - 0.25, p.y()) *
           (1.0 - smoothstep(-0.3, 0.2, p.z()));
}

/// Procedural head rig: ellipsoid skull with a hinged jaw region and two
/// eyeballs. Deterministic in the spec.
inline Rig make_rig(const ToyRigSpec& spec = {}) {
    spec.check();
    const std::size_t B = spec.num_shape, E = spec.num_expr, K = 4, J = K + 1, P = 9 * K;
    Rig rig;
    rig.num_shape = B;
    rig.num_expr = E;
    rig.num_joints = K;
    rig.jaw_index = kJaw;
    rig.joint_parents = {-1, kRoot, kNeck, kNeck, kNeck};
    const std::array<Vec3, 5> joints = {Vec3::Zero(), spec.neck, spec.jaw_hinge, spec.eye_centers[0],
                                        spec.eye_centers[1]};
    for (const Vec3& j : joints)
        for (int c = 0; c < 3; ++c) rig.rest_joints.push_back(static_cast<float>(j[c]));

    std::vector<Vec3> verts;
    std::vector<int> owner;
    auto add_sphere = [&](int level, const Vec3& center, const Vec3& radii, int eye) {
        const auto [v, f] = icosphere(level);
        const auto base = std::uint32_t(verts.size());
        for (const Vec3& p : v) {
            verts.push_back(center + p.cwiseProduct(radii));
            owner.push_back(eye);
        }
        for (const auto& tri : f)
            for (std::uint32_t k : tri) rig.faces.push_back(base + k);
    };
    add_sphere(spec.subdivisions, Vec3::Zero(), spec.skull_radii, -1);
    for (int e = 0; e < 2; ++e)
        add_sphere(spec.eye_subdivisions, spec.eye_centers[e], Vec3::Constant(spec.eye_radius), e);

    const std::size_t V = verts.size();
    for (const Vec3& p : verts)
        for (int c = 0; c < 3; ++c) rig.vertices.push_back(static_cast<float>(p[c]));

    rig.vertex_weights.assign(V * J, 0.0f);
    for (std::size_t v = 0; v < V; ++v) {
        float* w = &rig.vertex_weights[v * J];
        if (owner[v] >= 0) {
            w[kLeftEye + owner[v]] = 1.0f;
            continue;
        }
        w[kJaw] = static_cast<float>(jaw_weight(spec, verts[v]));
        w[kNeck] = static_cast<float>(neck_weight(spec, verts[v]) * (1.0 - w[kJaw]));
        w[kRoot] = 1.0f - w[kJaw] - w[kNeck];
    }

    // Bases: skull vertices only, cosine bumps displacing along the ellipsoid normal.
    auto skull_normal = [&](const Vec3& p) -> Vec3 {
        return p.cwiseQuotient(spec.skull_radii.cwiseProduct(spec.skull_radii)).normalized();
    };
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto random_center = [&]() -> Vec3 {
        const double z = 2.0 * unit(rng) - 1.0, phi = 2.0 * kPi * unit(rng);
        const double r = std::sqrt(1.0 - z * z);
        return Vec3(r * std::cos(phi), z, r * std::sin(phi)).cwiseProduct(spec.skull_radii);
    };
    rig.vertex_shape_basis.assign(V * 3 * B, 0.0f);
    rig.vertex_expr_basis.assign(V * 3 * E, 0.0f);
    rig.vertex_pose_basis.assign(V * 3 * P, 0.0f);
    for (std::size_t m = 0; m < B; ++m) {
        const Vec3 c = random_center();
        const double radius = 0.5 + 0.4 * unit(rng), amp = 0.04 * (2.0 * unit(rng) - 1.0);
        for (std::size_t v = 0; v < V; ++v) {
            if (owner[v] >= 0) continue;
            const Vec3 d = amp * cosine_bump(verts[v], c, radius) * skull_normal(verts[v]);
            for (int a = 0; a < 3; ++a) rig.vertex_shape_basis[(v * 3 + a) * B + m] = static_cast<float>(d[a]);
        }
    }
    const Vec3 chin(0.0, -spec.skull_radii.y() * 0.85, spec.skull_radii.z() * 0.5);
    for (std::size_t m = 0; m < E; ++m) {
        Vec3 c;
        double radius = 0.0;
        if (m == kJawOpenAssist) {
            c = chin;
            radius = 0.5;
        } else if (m != kBlink) {
            c = random_center();
            radius = 0.3 + 0.3 * unit(rng);
        }
        const double amp = m == kBlink ? 0.0 : 0.03 * (2.0 * unit(rng) - 1.0);
        for (std::size_t v = 0; v < V; ++v) {
            if (owner[v] >= 0) continue;
            Vec3 d;
            if (m == kJawOpenAssist) {
                d = Vec3(0.0, -0.06, 0.02) * cosine_bump(verts[v], c, radius);
            } else if (m == kBlink) {
                // Lids: skull vertices just above each eye drop down.
                d = Vec3::Zero();
                for (const Vec3& eye : spec.eye_centers)
                    d += Vec3(0.0, -0.05, 0.0) *
                         cosine_bump(verts[v], eye + Vec3(0.0, spec.eye_radius, 0.0), 2.0 * spec.eye_radius);
            } else {
                d = amp * cosine_bump(verts[v], c, radius) * skull_normal(verts[v]);
            }
            for (int a = 0; a < 3; ++a) rig.vertex_expr_basis[(v * 3 + a) * E + m] = static_cast<float>(d[a]);
        }
    }
    // Jaw corrective: the jaw joint's rotation-matrix entry (1, 2) pulls the chin slightly forward.
    const std::size_t jaw_feature = (kJaw - 1) * 9 + 1 * 3 + 2;
    for (std::size_t v = 0; v < V; ++v) {
        if (owner[v] >= 0) continue;
        const double w = rig.vertex_weights[v * J + kJaw];
        rig.vertex_pose_basis[(v * 3 + 2) * P + jaw_feature] = static_cast<float>(0.05 * w);
    }
    return rig;
}

/// Outward surface normal of the toy head at a rest-space point.
inline Vec3 rest_normal(const ToyRigSpec& spec, const Vec3& p, int eye) {
    if (eye >= 0) return (p - spec.eye_centers[eye]).normalized();
    return p.cwiseQuotient(spec.skull_radii.cwiseProduct(spec.skull_radii)).normalized();
}

struct SceneOptions {
    std::size_t num_points = 2000;
    std::size_t frames = 3;
    std::size_t cameras = 3;
    int width = 128;
    int height = 128;
    double flatness = 0.2;    // normal-axis scale relative to the tangent scale
    double opacity = 0.9;
    double overlap = 1.2;     // tangent scale relative to the mean point spacing
};

struct ToyScene {
    Rig rig;
    GaussianCloud cloud;
    io::Animation animation;
    std::vector<Camera> cameras;
};

/// Orbit cameras spread over +-30 degrees of azimuth around the head.
inline std::vector<Camera> toy_cameras(std::size_t count, int width, int height) {
    std::vector<Camera> out;
    for (std::size_t c = 0; c < count; ++c) {
        const double t = count == 1 ? 0.0 : double(c) / double(count - 1) * 2.0 - 1.0;
        out.push_back(orbit_camera({t * kPi / 6.0, 0.1, 4.5}, Vec3::Zero(), width, height));
    }
    return out;
}

/// Jaw opening and a blink over the frames, with a slight head turn.
inline io::Animation toy_animation(const ToyRigSpec& spec, const Rig& rig, std::size_t frames) {
    io::Animation a;
    a.shared_beta.assign(rig.num_shape, 0.0);
    for (std::size_t f = 0; f < frames; ++f) {
        const double t = frames == 1 ? 0.0 : double(f) / double(frames - 1);
        PoseState p = PoseState::rest(rig.num_shape, rig.num_expr, rig.num_joints, rig.jaw_index);
        p.beta = a.shared_beta;
        const double open = 0.3 * std::sin(kPi * t);
        p.theta[kJaw] = open * spec.jaw_axis.normalized();
        p.theta[kRoot] = Vec3(0.0, 0.2 * (t - 0.5), 0.0);
        p.psi[kJawOpenAssist] = open / 0.3;
        p.psi[kBlink] = t > 0.6 ? 1.0 : 0.0;
        a.frames.push_back(std::move(p));
    }
    return a;
}

/// Rig, a material-painted cloud sampled on it, an animation and cameras.
/// Points are flattened discs tangent to the surface; eyes are glossy.
inline ToyScene make_scene(const ToyRigSpec& spec = {}, const SceneOptions& options = {}) {
    ToyScene scene;
    scene.rig = make_rig(spec);
    const Rig& rig = scene.rig;
    GaussianCloud& cloud = scene.cloud;
    cloud = init_from_rig(rig, {options.num_points, spec.seed + 1});

    double area = 0.0;
    for (std::size_t f = 0; f < rig.num_faces(); ++f) area += face_area(rig, f);
    const double spacing = std::sqrt(area / double(std::max<std::size_t>(options.num_points, 1)));
    const double tangent = options.overlap * spacing * 0.5;

    std::mt19937_64 rng(spec.seed + 2);
    std::uniform_real_distribution<double> jitter(-1.0, 1.0);
    const std::size_t J = rig.num_transforms();
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        int eye = -1;
        if (cloud.blend_weights[i * J + kLeftEye] > 0.5f) eye = 0;
        if (cloud.blend_weights[i * J + kRightEye] > 0.5f) eye = 1;
        const Vec3 p = cloud.position(i);
        const Vec3 n = rest_normal(spec, p, eye);
        cloud.set_rotation(i, Quat::FromTwoVectors(Vec3::UnitZ(), n));
        const double s = eye >= 0 ? std::min(tangent, 0.3 * spec.eye_radius) : tangent;
        cloud.set_scale(i, Vec3(s, s, options.flatness * s));
        cloud.opacities[i] = static_cast<float>(options.opacity);

        const double v = jitter(rng);
        Vec3 albedo;
        double roughness = 0.0, f0 = 0.0;
        if (eye >= 0) {
            const bool iris = (p - spec.eye_centers[eye]).normalized().z() > 0.85;
            albedo = iris ? Vec3(0.15, 0.25, 0.35) : Vec3(0.85, 0.85, 0.82);
            roughness = 0.15;
            f0 = 0.06;
        } else {
            const double lips = cosine_bump(p, Vec3(0.0, -0.55, 0.75), 0.2);
            albedo = (1.0 - lips) * Vec3(0.72, 0.52, 0.42) + lips * Vec3(0.6, 0.25, 0.25);
            albedo *= 1.0 + 0.05 * v;
            roughness = 0.55 + 0.1 * v;
            f0 = 0.04 + 0.01 * v;
        }
        for (int c = 0; c < 3; ++c) cloud.albedo[3 * i + c] = static_cast<float>(saturate(albedo[c]));
        cloud.roughness[i] = static_cast<float>(roughness);
        cloud.f0[i] = static_cast<float>(f0);
    }
    cloud = clamp_materials(std::move(cloud));
    scene.animation = toy_animation(spec, rig, options.frames);
    scene.cameras = toy_cameras(options.cameras, options.width, options.height);
    return scene;
}

/// Names accepted by toy_environment.
inline std::vector<std::string> toy_environment_names() {
    return {"studio", "sky", "sunset", "constant", "black"};
}

/// Analytic radiance for a named environment (y up).
inline Vec3 toy_radiance(const std::string& name, const Vec3& d) {
    if (name == "constant") return Vec3::Constant(1.0);
    if (name == "black") return Vec3::Zero();
    if (name == "sky") return Vec3(0.2, 0.3, 0.5) + std::max(0.0, d.y()) * Vec3(0.8, 0.7, 0.5);
    if (name == "sunset") {
        const Vec3 sun = Vec3(-0.8, 0.15, 0.5).normalized();
        const double t = smoothstep(-0.2, 0.4, d.y());
        return (1.0 - t) * Vec3(0.35, 0.2, 0.12) + t * Vec3(0.15, 0.2, 0.35) +
               6.0 * std::exp(40.0 * (d.dot(sun) - 1.0)) * Vec3(1.0, 0.6, 0.3);
    }
    if (name == "studio") {
        const Vec3 key = Vec3(0.5, 0.6, 0.7).normalized(), fill = Vec3(-0.7, 0.1, 0.6).normalized();
        return Vec3::Constant(0.05) + 4.0 * std::exp(30.0 * (d.dot(key) - 1.0)) * Vec3(1.0, 0.95, 0.9) +
               1.0 * std::exp(10.0 * (d.dot(fill) - 1.0)) * Vec3(0.6, 0.7, 1.0);
    }
    throw std::invalid_argument("toy_environment: unknown environment '" + name + "'");
}

/// Equirectangular image of a named environment.
inline Image toy_environment(const std::string& name, int width = 256, int height = 128) {
    toy_radiance(name, Vec3::UnitY());
    return make_equirect(width, height, [&](const Vec3& d) -> Vec3 { return toy_radiance(name, d); });
}

}  // namespace gsav::toy
