// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gsav/io/binary.hpp"
#include "gsav/io/pfm.hpp"
#include "gsav/light.hpp"

#include <json.hpp>

#include <string>

namespace gsav::io {

/// Light container: "GSLT", u16 version, u32 metadata length, JSON metadata,
/// then u64-length-prefixed PFM payloads in order: the six irradiance faces,
/// the six faces of each prefiltered level, and the BRDF table as one RGB
/// PFM (R = scale, G = bias, B = 0; row = roughness, column = n.v).
inline constexpr std::uint16_t kLightVersion = 1;

namespace detail {

inline Image cube_face_image(const Cubemap& c, int face) {
    Image img(c.res, c.res, 3);
    for (int j = 0; j < c.res; ++j)
        for (int i = 0; i < c.res; ++i) {
            const std::size_t k = c.index(face, i, j);
            for (int ch = 0; ch < 3; ++ch) img.at(i, j, ch) = c.data[k + ch];
        }
    return img;
}

inline void put_payload(Writer& w, const Bytes& payload) {
    w.scalar(std::uint64_t(payload.size()));
    w.raw(payload);
}

inline Image get_payload(Reader& r, const std::string& what) {
    const auto len = r.scalar<std::uint64_t>(what + " length");
    return decode_pfm(r.take(std::size_t(len), what));
}

inline Cubemap read_cube(Reader& r, int res, const std::string& what) {
    Cubemap c(res);
    for (int f = 0; f < 6; ++f) {
        const Image img = get_payload(r, what + " face " + std::to_string(f));
        if (img.width != res || img.height != res || img.channels != 3)
            throw AssetError(AssetError::Code::DimMismatch, what + " face " + std::to_string(f) + " has the wrong size");
        for (int j = 0; j < res; ++j)
            for (int i = 0; i < res; ++i) {
                const std::size_t k = c.index(f, i, j);
                for (int ch = 0; ch < 3; ++ch) c.data[k + ch] = img.at(i, j, ch);
            }
    }
    return c;
}

}  // namespace detail

inline Bytes encode_light(const EnvironmentLight& light) {
    nlohmann::ordered_json meta;
    meta["name"] = light.name;
    meta["yaw"] = light.yaw;
    meta["irradiance_res"] = light.irradiance.res;
    nlohmann::ordered_json levels = nlohmann::ordered_json::array();
    for (const Cubemap& c : light.prefiltered) levels.push_back(c.res);
    meta["prefiltered_res"] = levels;
    meta["lut_res"] = light.brdf_lut.res;
    const BakeInfo& b = light.bake;
    meta["bake"] = {{"seed", b.seed},
                    {"source_res", b.source_res},
                    {"prefilter_samples", b.prefilter_samples},
                    {"lut_samples", b.lut_samples},
                    {"mirror_roughness", b.mirror_roughness},
                    {"distribution", b.distribution},
                    {"geometry", b.geometry},
                    {"irradiance_res", b.irradiance_res},
                    {"env_res", b.env_res},
                    {"mips", b.mips},
                    {"lut_res", b.lut_res}};
    const std::string text = meta.dump();

    Writer w;
    w.raw("GSLT");
    w.scalar(kLightVersion);
    w.scalar(std::uint32_t(text.size()));
    w.raw(text);
    for (int f = 0; f < 6; ++f) detail::put_payload(w, encode_pfm(detail::cube_face_image(light.irradiance, f)));
    for (const Cubemap& c : light.prefiltered)
        for (int f = 0; f < 6; ++f) detail::put_payload(w, encode_pfm(detail::cube_face_image(c, f)));
    const int L = light.brdf_lut.res;
    Image lut(L, L, 3);
    for (int r = 0; r < L; ++r)
        for (int c = 0; c < L; ++c) {
            lut.at(c, r, 0) = light.brdf_lut.scale(r, c);
            lut.at(c, r, 1) = light.brdf_lut.bias(r, c);
        }
    detail::put_payload(w, encode_pfm(lut));
    return std::move(w.bytes);
}

inline EnvironmentLight decode_light(std::span<const std::uint8_t> data) {
    Reader r(data);
    const auto magic = r.take(4, "magic");
    if (std::string(magic.begin(), magic.end()) != "GSLT") throw AssetError(AssetError::Code::BadMagic, "not a GSLT light asset");
    const auto version = r.scalar<std::uint16_t>("version");
    if (version != kLightVersion)
        throw AssetError(AssetError::Code::BadVersion, "GSLT version " + std::to_string(version) + " is not supported");
    const auto text = r.take(r.scalar<std::uint32_t>("metadata length"), "metadata");
    EnvironmentLight light;
    try {
        const nlohmann::json meta = nlohmann::json::parse(text.begin(), text.end());
        light.name = meta.at("name");
        light.yaw = meta.at("yaw");
        const auto& b = meta.at("bake");
        light.bake.seed = b.at("seed");
        light.bake.source_res = b.at("source_res");
        light.bake.prefilter_samples = b.at("prefilter_samples");
        light.bake.lut_samples = b.at("lut_samples");
        light.bake.mirror_roughness = b.at("mirror_roughness");
        light.bake.distribution = b.at("distribution");
        light.bake.geometry = b.at("geometry");
        light.bake.irradiance_res = b.at("irradiance_res");
        light.bake.env_res = b.at("env_res");
        light.bake.mips = b.at("mips");
        light.bake.lut_res = b.at("lut_res");
        light.irradiance = detail::read_cube(r, meta.at("irradiance_res"), "irradiance");
        int m = 0;
        for (int res : meta.at("prefiltered_res").get<std::vector<int>>())
            light.prefiltered.push_back(detail::read_cube(r, res, "prefiltered level " + std::to_string(m++)));
        const int L = meta.at("lut_res");
        const Image lut = detail::get_payload(r, "brdf lut");
        if (lut.width != L || lut.height != L || lut.channels != 3)
            throw AssetError(AssetError::Code::DimMismatch, "brdf lut has the wrong size");
        light.brdf_lut = BrdfLut(L);
        for (int row = 0; row < L; ++row)
            for (int c = 0; c < L; ++c) {
                light.brdf_lut.data[light.brdf_lut.index(row, c)] = lut.at(c, row, 0);
                light.brdf_lut.data[light.brdf_lut.index(row, c) + 1] = lut.at(c, row, 1);
            }
    } catch (const nlohmann::json::exception& e) {
        throw AssetError(AssetError::Code::Format, std::string("light metadata: ") + e.what());
    }
    if (r.remaining() != 0) throw AssetError(AssetError::Code::DimMismatch, "trailing bytes after the light payloads");
    return light;
}

inline void save_light(const std::string& path, const EnvironmentLight& light) { write_file(path, encode_light(light)); }
inline EnvironmentLight load_light(const std::string& path) { return decode_light(read_file(path)); }

}  // namespace gsav::io
