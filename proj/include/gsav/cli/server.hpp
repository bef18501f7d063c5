// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "gsav/cli/session.hpp"

#include <httplib.h>
#include <json.hpp>

#include <string>

namespace gsav::cli {

inline void json_reply(httplib::Response& res, int status, const nlohmann::ordered_json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

inline void error_reply(httplib::Response& res, int status, const std::string& message) {
    json_reply(res, status, {{"error", message}});
}

/// Keeps SO_REUSEADDR but drops httplib's SO_REUSEPORT, so binding a port
/// another server already holds fails instead of sharing it.
inline void exclusive_port(httplib::Server& server) {
    server.set_socket_options([](socket_t sock) {
        int yes = 1;
        ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes), sizeof yes);
    });
}

/// Routes:
///   GET  /state      full session state as JSON
///   POST /params     partial update; 400 {"error": ...} leaves the state unchanged
///   GET  /frame.png  the current state rendered as PNG
///   GET  /lights     {"lights": [...], "selected": name}
inline void install_routes(httplib::Server& server, Session& session) {
    server.Get("/state", [&](const httplib::Request&, httplib::Response& res) {
        json_reply(res, 200, state_to_json(session.state()));
    });
    server.Post("/params", [&](const httplib::Request& req, httplib::Response& res) {
        nlohmann::json patch;
        try {
            patch = nlohmann::json::parse(req.body);
        } catch (const nlohmann::json::exception& e) {
            error_reply(res, 400, std::string("malformed JSON: ") + e.what());
            return;
        }
        try {
            json_reply(res, 200, state_to_json(session.update(patch)));
        } catch (const RequestError& e) {
            error_reply(res, 400, e.what());
        }
    });
    server.Get("/frame.png", [&](const httplib::Request&, httplib::Response& res) {
        try {
            const io::Bytes png = session.frame_png();
            res.set_content(std::string(png.begin(), png.end()), "image/png");
        } catch (const std::exception& e) {
            error_reply(res, 500, e.what());
        }
    });
    server.Get("/lights", [&](const httplib::Request&, httplib::Response& res) {
        json_reply(res, 200, {{"lights", session.light_names()}, {"selected", session.state().light}});
    });
    server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        try {
            std::rethrow_exception(ep);
        } catch (const std::exception& e) {
            error_reply(res, 500, e.what());
        } catch (...) {
            error_reply(res, 500, "unknown error");
        }
    });
}

}  // namespace gsav::cli
