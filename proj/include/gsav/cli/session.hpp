// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gsav/cli/frame.hpp"
#include "gsav/io/camera_io.hpp"
#include "gsav/io/light_asset.hpp"
#include "gsav/io/png.hpp"

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

namespace gsav::cli {

/// Error in a client request; the message names the offending field.
class RequestError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Everything a frame depends on besides the assets.
struct SessionState {
    std::vector<double> shape;
    std::vector<double> expression;
    std::vector<Vec3> joints;  // axis-angle per transform, 0 is global
    Vec3 translation = Vec3::Zero();
    double env_yaw = 0.0;
    double f0_scale = 1.0;
    double roughness_scale = 1.0;
    double exposure = 1.0;
    double azimuth_deg = 0.0;
    double elevation_deg = 0.0;
    double distance = 4.5;
    std::string light;

    bool operator==(const SessionState&) const = default;
};

inline nlohmann::ordered_json state_to_json(const SessionState& s) {
    nlohmann::ordered_json j;
    j["shape"] = s.shape;
    j["expression"] = s.expression;
    j["joints"] = nlohmann::ordered_json::array();
    for (const Vec3& t : s.joints) j["joints"].push_back({t.x(), t.y(), t.z()});
    j["translation"] = {s.translation.x(), s.translation.y(), s.translation.z()};
    j["env_yaw"] = s.env_yaw;
    j["f0_scale"] = s.f0_scale;
    j["roughness_scale"] = s.roughness_scale;
    j["exposure"] = s.exposure;
    j["camera"] = {{"azimuth_deg", s.azimuth_deg}, {"elevation_deg", s.elevation_deg}, {"distance", s.distance}};
    j["light"] = s.light;
    return j;
}

namespace detail {

inline double number(const nlohmann::json& j, const std::string& field) {
    if (!j.is_number()) throw RequestError("field '" + field + "' must be a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw RequestError("field '" + field + "' must be finite");
    return v;
}

inline Vec3 triple(const nlohmann::json& j, const std::string& field) {
    if (!j.is_array() || j.size() != 3) throw RequestError("field '" + field + "' must be an array of 3 numbers");
    return {number(j[0], field), number(j[1], field), number(j[2], field)};
}

/// Whole-array or index-object update of a coefficient vector.
inline void merge_scalars(std::vector<double>& dst, const nlohmann::json& value, const std::string& field) {
    if (value.is_array()) {
        if (value.size() != dst.size())
            throw RequestError("field '" + field + "' must have " + std::to_string(dst.size()) + " entries");
        for (std::size_t m = 0; m < value.size(); ++m) dst[m] = number(value[m], field);
    } else if (value.is_object()) {
        for (const auto& [idx, v] : value.items()) {
            std::size_t m = 0;
            try {
                m = std::stoul(idx);
            } catch (const std::exception&) {
                throw RequestError("field '" + field + "." + idx + "' is not an index");
            }
            if (m >= dst.size()) throw RequestError("field '" + field + "." + idx + "' is out of range");
            dst[m] = number(v, field + "." + idx);
        }
    } else {
        throw RequestError("field '" + field + "' must be an array or an index object");
    }
}

}  // namespace detail

/// Merges a partial JSON update into a copy of `state`. Arrays may be given
/// whole or as an object of index -> value for sparse edits. Throws
/// RequestError naming the first bad field; `state` itself is never touched.
inline SessionState merge_params(const SessionState& state, const nlohmann::json& patch,
                                 const std::vector<std::string>& lights) {
    if (!patch.is_object()) throw RequestError("request body must be a JSON object");
    SessionState s = state;
    auto positive = [](double v, const std::string& field) {
        if (!(v > 0.0)) throw RequestError("field '" + field + "' must be > 0");
        return v;
    };
    for (const auto& [key, value] : patch.items()) {
        if (key == "shape") {
            detail::merge_scalars(s.shape, value, key);
        } else if (key == "expression") {
            detail::merge_scalars(s.expression, value, key);
        } else if (key == "joints") {
            if (value.is_array()) {
                if (value.size() != s.joints.size())
                    throw RequestError("field 'joints' must have " + std::to_string(s.joints.size()) + " entries");
                for (std::size_t k = 0; k < value.size(); ++k) s.joints[k] = detail::triple(value[k], key);
            } else if (value.is_object()) {
                for (const auto& [idx, v] : value.items()) {
                    std::size_t k = 0;
                    try {
                        k = std::stoul(idx);
                    } catch (const std::exception&) {
                        throw RequestError("field 'joints." + idx + "' is not an index");
                    }
                    if (k >= s.joints.size()) throw RequestError("field 'joints." + idx + "' is out of range");
                    s.joints[k] = detail::triple(v, "joints." + idx);
                }
            } else {
                throw RequestError("field 'joints' must be an array or an index object");
            }
        } else if (key == "translation") {
            s.translation = detail::triple(value, key);
        } else if (key == "env_yaw") {
            s.env_yaw = detail::number(value, key);
        } else if (key == "f0_scale") {
            s.f0_scale = detail::number(value, key);
            if (s.f0_scale < 0.0) throw RequestError("field 'f0_scale' must be >= 0");
        } else if (key == "roughness_scale") {
            s.roughness_scale = positive(detail::number(value, key), key);
        } else if (key == "exposure") {
            s.exposure = positive(detail::number(value, key), key);
        } else if (key == "camera") {
            if (!value.is_object()) throw RequestError("field 'camera' must be an object");
            for (const auto& [ck, cv] : value.items()) {
                const std::string field = "camera." + ck;
                if (ck == "azimuth_deg") s.azimuth_deg = detail::number(cv, field);
                else if (ck == "elevation_deg") s.elevation_deg = detail::number(cv, field);
                else if (ck == "distance") s.distance = positive(detail::number(cv, field), field);
                else throw RequestError("unknown field '" + field + "'");
            }
        } else if (key == "light") {
            if (!value.is_string()) throw RequestError("field 'light' must be a string");
            const std::string name = value.get<std::string>();
            if (std::find(lights.begin(), lights.end(), name) == lights.end())
                throw RequestError("field 'light': no light named '" + name + "'");
            s.light = name;
        } else {
            throw RequestError("unknown field '" + key + "'");
        }
    }
    return s;
}

/// The orbit camera description for a state, in the camera file format.
inline nlohmann::json camera_json(const SessionState& s, int width, int height) {
    return {{"width", width},
            {"height", height},
            {"fov_deg", 30.0},
            {"orbit", {{"azimuth_deg", s.azimuth_deg}, {"elevation_deg", s.elevation_deg}, {"distance", s.distance}}}};
}

inline PoseState state_pose(const SessionState& s, const Rig& rig) {
    PoseState p = PoseState::rest(rig.num_shape, rig.num_expr, rig.num_joints, rig.jaw_index);
    p.beta = s.shape;
    p.psi = s.expression;
    p.theta = s.joints;
    p.translation = s.translation;
    return p;
}

inline ShadeParams state_shade(const SessionState& s) {
    return {s.f0_scale, s.roughness_scale, s.env_yaw, s.exposure};
}

/// Lights in a directory: every *.gslt file, keyed by file stem, sorted.
inline std::map<std::string, EnvironmentLight> load_light_dir(const std::string& dir) {
    std::map<std::string, EnvironmentLight> out;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".gslt")
            out.emplace(entry.path().stem().string(), io::load_light(entry.path().string()));
    if (out.empty()) throw std::runtime_error("no .gslt light assets in " + dir);
    return out;
}

/// One interactive rendering session. State reads and updates hold a short
/// state lock; renders snapshot the state and hold a separate render lock,
/// so /state never waits on a render.
class Session {
public:
    Session(GaussianCloud cloud, Rig rig, std::map<std::string, EnvironmentLight> lights, int width, int height,
            Vec3 background = Vec3::Zero())
        : cloud_(std::move(cloud)), rig_(std::move(rig)), lights_(std::move(lights)), width_(width), height_(height),
          background_(background) {
        if (lights_.empty()) throw std::invalid_argument("Session: no lights");
        for (const auto& [name, light] : lights_) names_.push_back(name);
        state_ = default_state();
    }

    SessionState default_state() const {
        SessionState s;
        s.shape.assign(rig_.num_shape, 0.0);
        s.expression.assign(rig_.num_expr, 0.0);
        s.joints.assign(rig_.num_transforms(), Vec3::Zero());
        s.light = names_.front();
        return s;
    }

    SessionState state() const {
        std::lock_guard lock(state_mutex_);
        return state_;
    }

    /// Applies a partial update; on error the state is unchanged.
    SessionState update(const nlohmann::json& patch) {
        std::lock_guard lock(state_mutex_);
        state_ = merge_params(state_, patch, names_);
        return state_;
    }

    const std::vector<std::string>& light_names() const { return names_; }
    int width() const { return width_; }
    int height() const { return height_; }

    Frame render(const SessionState& s) const {
        std::lock_guard lock(render_mutex_);
        const Camera cam = io::camera_from_json(camera_json(s, width_, height_));
        return render_frame(cloud_, rig_, state_pose(s, rig_), cam, lights_.at(s.light), state_shade(s), background_);
    }

    io::Bytes frame_png() const { return io::encode_png(render(state()).color); }

private:
    GaussianCloud cloud_;
    Rig rig_;
    std::map<std::string, EnvironmentLight> lights_;
    std::vector<std::string> names_;
    int width_, height_;
    Vec3 background_;
    SessionState state_;
    mutable std::mutex state_mutex_;
    mutable std::mutex render_mutex_;
};

}  // namespace gsav::cli
