// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gsav/io/binary.hpp"
#include "gsav/pose.hpp"

#include <json.hpp>

#include <sstream>
#include <string>
#include <vector>

namespace gsav::io {

/// Frame-by-frame pose track. Stored one JSON record per line:
///
///   {"shared_beta": [...]}                       optional first line
///   {"frame": 0, "psi": [...], "theta": [[x,y,z], ...], "translation": [x,y,z]}
///
/// A frame may carry its own "beta"; otherwise the shared one applies.
/// "jaw_index" is optional per frame and defaults to 2.
struct Animation {
    std::vector<double> shared_beta;
    std::vector<PoseState> frames;

    bool operator==(const Animation&) const = default;
};

namespace detail {

inline nlohmann::ordered_json vec3_json(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

inline Vec3 vec3_from(const nlohmann::json& j, const std::string& what) {
    if (!j.is_array() || j.size() != 3) throw AssetError(AssetError::Code::Format, what + " must be a 3-element array");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace detail

inline std::string encode_animation(const Animation& anim) {
    std::string out;
    if (!anim.shared_beta.empty()) out += nlohmann::ordered_json{{"shared_beta", anim.shared_beta}}.dump() + "\n";
    for (std::size_t f = 0; f < anim.frames.size(); ++f) {
        const PoseState& p = anim.frames[f];
        nlohmann::ordered_json rec;
        rec["frame"] = f;
        if (p.beta != anim.shared_beta) rec["beta"] = p.beta;
        rec["psi"] = p.psi;
        nlohmann::ordered_json theta = nlohmann::ordered_json::array();
        for (const Vec3& t : p.theta) theta.push_back(detail::vec3_json(t));
        rec["theta"] = theta;
        rec["translation"] = detail::vec3_json(p.translation);
        if (p.jaw_index != 2) rec["jaw_index"] = p.jaw_index;
        out += rec.dump() + "\n";
    }
    return out;
}

inline Animation decode_animation(const std::string& text) {
    Animation anim;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    std::vector<nlohmann::json> records;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw AssetError(AssetError::Code::Format, "animation line " + std::to_string(lineno) + ": " + e.what());
        }
        if (j.contains("shared_beta")) {
            if (!records.empty()) throw AssetError(AssetError::Code::Format, "shared_beta must precede the frames");
            anim.shared_beta = j["shared_beta"].get<std::vector<double>>();
        } else {
            records.push_back(std::move(j));
        }
    }
    for (std::size_t f = 0; f < records.size(); ++f) {
        const nlohmann::json& j = records[f];
        try {
            if (j.at("frame").get<std::size_t>() != f)
                throw AssetError(AssetError::Code::Format, "animation frames must be numbered 0, 1, 2, ...");
            PoseState p;
            p.beta = j.contains("beta") ? j["beta"].get<std::vector<double>>() : anim.shared_beta;
            p.psi = j.at("psi").get<std::vector<double>>();
            for (const auto& t : j.at("theta")) p.theta.push_back(detail::vec3_from(t, "theta entry"));
            p.translation = detail::vec3_from(j.at("translation"), "translation");
            p.jaw_index = j.value("jaw_index", 2);
            if (!anim.frames.empty()) {
                const PoseState& a = anim.frames.front();
                if (a.beta.size() != p.beta.size() || a.psi.size() != p.psi.size() || a.theta.size() != p.theta.size())
                    throw AssetError(AssetError::Code::DimMismatch,
                                     "animation frame " + std::to_string(f) + " changes dimensions");
            }
            anim.frames.push_back(std::move(p));
        } catch (const nlohmann::json::exception& e) {
            throw AssetError(AssetError::Code::Format, "animation frame " + std::to_string(f) + ": " + e.what());
        }
    }
    return anim;
}

inline void save_animation(const std::string& path, const Animation& anim) {
    const std::string s = encode_animation(anim);
    write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
}

inline Animation load_animation(const std::string& path) {
    const Bytes b = read_file(path);
    return decode_animation(std::string(b.begin(), b.end()));
}

}  // namespace gsav::io
