// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gsav/io/binary.hpp"
#include "gsav/rig.hpp"

#include <json.hpp>

#include <string>

namespace gsav::io {

/// Rig container: "GSRG", u16 version, u32 descriptor length, a JSON
/// descriptor (dims, hierarchy, array table with byte offsets into the
/// blob), then the little-endian blob.
inline constexpr std::uint16_t kRigVersion = 1;

namespace detail {

template <typename T>
void append_array(Writer& blob, nlohmann::ordered_json& table, const char* name, const char* dtype,
                  const std::vector<T>& v) {
    table.push_back({{"name", name}, {"dtype", dtype}, {"offset", blob.bytes.size()}, {"count", v.size()}});
    for (T x : v) blob.scalar(x);
}

template <typename T>
std::vector<T> read_array(std::span<const std::uint8_t> blob, const nlohmann::json& table, const std::string& name,
                          const std::string& dtype) {
    for (const auto& e : table) {
        if (e.at("name") != name) continue;
        if (e.at("dtype") != dtype)
            throw AssetError(AssetError::Code::Format, "rig array '" + name + "' has dtype " + e.at("dtype").dump());
        const std::size_t offset = e.at("offset"), count = e.at("count");
        if (offset > blob.size())
            throw AssetError(AssetError::Code::Truncated, "truncated while reading '" + name + "'");
        Reader r(blob.subspan(offset));
        std::vector<T> out(count);
        for (std::size_t i = 0; i < count; ++i) out[i] = r.scalar<T>(name);
        return out;
    }
    throw AssetError(AssetError::Code::Format, "rig descriptor lacks array '" + name + "'");
}

}  // namespace detail

inline Bytes encode_rig(const Rig& rig) {
    Writer blob;
    nlohmann::ordered_json table = nlohmann::ordered_json::array();
    detail::append_array(blob, table, "vertices", "f32", rig.vertices);
    detail::append_array(blob, table, "faces", "u32", rig.faces);
    detail::append_array(blob, table, "rest_joints", "f32", rig.rest_joints);
    detail::append_array(blob, table, "vertex_shape_basis", "f32", rig.vertex_shape_basis);
    detail::append_array(blob, table, "vertex_expr_basis", "f32", rig.vertex_expr_basis);
    detail::append_array(blob, table, "vertex_pose_basis", "f32", rig.vertex_pose_basis);
    detail::append_array(blob, table, "vertex_weights", "f32", rig.vertex_weights);
    nlohmann::ordered_json desc;
    desc["num_shape"] = rig.num_shape;
    desc["num_expr"] = rig.num_expr;
    desc["num_joints"] = rig.num_joints;
    desc["jaw_index"] = rig.jaw_index;
    desc["joint_parents"] = rig.joint_parents;
    desc["pose_feature"] = "row-major (R - I), joints 1..K";
    desc["arrays"] = table;
    const std::string text = desc.dump();

    Writer w;
    w.raw("GSRG");
    w.scalar(kRigVersion);
    w.scalar(std::uint32_t(text.size()));
    w.raw(text);
    w.raw(blob.bytes);
    return std::move(w.bytes);
}

inline Rig decode_rig(std::span<const std::uint8_t> data) {
    Reader r(data);
    const auto magic = r.take(4, "magic");
    if (std::string(magic.begin(), magic.end()) != "GSRG") throw AssetError(AssetError::Code::BadMagic, "not a GSRG rig asset");
    const auto version = r.scalar<std::uint16_t>("version");
    if (version != kRigVersion)
        throw AssetError(AssetError::Code::BadVersion, "GSRG version " + std::to_string(version) + " is not supported");
    const std::uint32_t len = r.scalar<std::uint32_t>("descriptor length");
    const auto text = r.take(len, "descriptor");
    nlohmann::json desc;
    try {
        desc = nlohmann::json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::exception& e) {
        throw AssetError(AssetError::Code::Format, std::string("rig descriptor: ") + e.what());
    }
    const auto blob = data.subspan(r.position());
    Rig rig;
    try {
        rig.num_shape = desc.at("num_shape");
        rig.num_expr = desc.at("num_expr");
        rig.num_joints = desc.at("num_joints");
        rig.jaw_index = desc.at("jaw_index");
        rig.joint_parents = desc.at("joint_parents").get<std::vector<std::int32_t>>();
        const auto& t = desc.at("arrays");
        rig.vertices = detail::read_array<float>(blob, t, "vertices", "f32");
        rig.faces = detail::read_array<std::uint32_t>(blob, t, "faces", "u32");
        rig.rest_joints = detail::read_array<float>(blob, t, "rest_joints", "f32");
        rig.vertex_shape_basis = detail::read_array<float>(blob, t, "vertex_shape_basis", "f32");
        rig.vertex_expr_basis = detail::read_array<float>(blob, t, "vertex_expr_basis", "f32");
        rig.vertex_pose_basis = detail::read_array<float>(blob, t, "vertex_pose_basis", "f32");
        rig.vertex_weights = detail::read_array<float>(blob, t, "vertex_weights", "f32");
    } catch (const nlohmann::json::exception& e) {
        throw AssetError(AssetError::Code::Format, std::string("rig descriptor: ") + e.what());
    }
    const std::size_t V = rig.num_vertices(), J = rig.num_transforms();
    if (rig.vertices.size() % 3 != 0 || rig.vertex_shape_basis.size() != V * 3 * rig.num_shape ||
        rig.vertex_expr_basis.size() != V * 3 * rig.num_expr ||
        rig.vertex_pose_basis.size() != V * 27 * rig.num_joints || rig.vertex_weights.size() != V * J ||
        rig.rest_joints.size() != 3 * J || rig.joint_parents.size() != J)
        throw AssetError(AssetError::Code::DimMismatch, "GSRG arrays disagree with the declared dims");
    return rig;
}

inline void save_rig(const std::string& path, const Rig& rig) { write_file(path, encode_rig(rig)); }
inline Rig load_rig(const std::string& path) { return decode_rig(read_file(path)); }

}  // namespace gsav::io
