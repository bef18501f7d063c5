// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gsav/camera.hpp"
#include "gsav/io/binary.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace gsav::io {

/// Camera JSON. Either explicit intrinsics/extrinsics
///
///   {"width": 256, "height": 256, "fx": .., "fy": .., "cx": .., "cy": ..,
///    "world_to_camera": [[r00, r01, r02, t0], [..], [..]], "near": .., "far": ..}
///
/// or an orbit around a target (y up, azimuth 0 on +z, angles in degrees):
///
///   {"width": 256, "height": 256, "fov_deg": 30,
///    "orbit": {"azimuth_deg": 0, "elevation_deg": 0, "distance": 4}, "target": [0, 0, 0]}
///
/// A camera file holds one such object or an array of them.
inline nlohmann::ordered_json camera_to_json(const Camera& cam) {
    nlohmann::ordered_json j;
    j["width"] = cam.width;
    j["height"] = cam.height;
    j["fx"] = cam.fx;
    j["fy"] = cam.fy;
    j["cx"] = cam.cx;
    j["cy"] = cam.cy;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (int r = 0; r < 3; ++r)
        rows.push_back({cam.world_to_camera(r, 0), cam.world_to_camera(r, 1), cam.world_to_camera(r, 2),
                        cam.world_to_camera(r, 3)});
    j["world_to_camera"] = rows;
    j["near"] = cam.near;
    j["far"] = cam.far;
    return j;
}

inline Camera camera_from_json(const nlohmann::json& j) {
    try {
        Camera cam;
        const int w = j.at("width"), h = j.at("height");
        if (j.contains("orbit")) {
            const auto& o = j["orbit"];
            Orbit orbit;
            orbit.azimuth = o.value("azimuth_deg", 0.0) * kPi / 180.0;
            orbit.elevation = o.value("elevation_deg", 0.0) * kPi / 180.0;
            orbit.distance = o.value("distance", 4.0);
            Vec3 target = Vec3::Zero();
            if (j.contains("target")) {
                const auto& t = j["target"];
                target = Vec3(t.at(0), t.at(1), t.at(2));
            }
            cam = orbit_camera(orbit, target, w, h, j.value("fov_deg", 30.0) * kPi / 180.0);
        } else {
            cam.width = w;
            cam.height = h;
            cam.fx = j.at("fx");
            cam.fy = j.at("fy");
            cam.cx = j.at("cx");
            cam.cy = j.at("cy");
            const auto& m = j.at("world_to_camera");
            for (int r = 0; r < 3; ++r)
                for (int c = 0; c < 4; ++c) cam.world_to_camera(r, c) = m.at(r).at(c);
        }
        cam.near = j.value("near", cam.near);
        cam.far = j.value("far", cam.far);
        cam.check();
        return cam;
    } catch (const nlohmann::json::exception& e) {
        throw AssetError(AssetError::Code::Format, std::string("camera: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw AssetError(AssetError::Code::Format, e.what());
    }
}

inline std::vector<Camera> decode_cameras(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw AssetError(AssetError::Code::Format, std::string("camera file: ") + e.what());
    }
    std::vector<Camera> out;
    if (j.is_array())
        for (const auto& c : j) out.push_back(camera_from_json(c));
    else
        out.push_back(camera_from_json(j));
    if (out.empty()) throw AssetError(AssetError::Code::Format, "camera file holds no cameras");
    return out;
}

inline std::string encode_cameras(const std::vector<Camera>& cams) {
    nlohmann::ordered_json j = nlohmann::ordered_json::array();
    for (const Camera& c : cams) j.push_back(camera_to_json(c));
    return j.dump(2) + "\n";
}

inline std::vector<Camera> load_cameras(const std::string& path) {
    const Bytes b = read_file(path);
    return decode_cameras(std::string(b.begin(), b.end()));
}

inline void save_cameras(const std::string& path, const std::vector<Camera>& cams) {
    const std::string s = encode_cameras(cams);
    write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
}

}  // namespace gsav::io
