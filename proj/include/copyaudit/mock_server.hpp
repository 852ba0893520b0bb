// Copyright 2026 The copyaudit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <exception>
#include <functional>
#include <string>

#include "copyaudit/detail/httplib.hpp"
#include "json.hpp"

#include "copyaudit/backends.hpp"
#include "copyaudit/error.hpp"
#include "copyaudit/wire.hpp"

namespace copyaudit {

namespace server_detail {

inline void reply_json(httplib::Response& res, int status, const nlohmann::json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

inline void reply_error(httplib::Response& res, int status, const std::string& message) {
    reply_json(res, status, {{"error", message}});
}

/// Parses the request body as a JSON object or answers 400.
inline bool parse_body(const httplib::Request& req, httplib::Response& res, nlohmann::json& out) {
    out = nlohmann::json::parse(req.body, nullptr, false);
    if (out.is_discarded() || !out.is_object()) {
        reply_error(res, 400, "request body must be a JSON object");
        return false;
    }
    return true;
}

inline bool string_field(const nlohmann::json& body, const char* key, httplib::Response& res, std::string& out) {
    const auto it = body.find(key);
    if (it == body.end() || !it->is_string()) {
        reply_error(res, 400, std::string("missing string field \"") + key + "\"");
        return false;
    }
    out = it->get<std::string>();
    return true;
}

}  // namespace server_detail

using RequestLogger = std::function<void(const httplib::Request&, const httplib::Response&)>;

/// Installs the mock /segment, /generate and /health routes on `server`.
/// Handlers keep no state between requests.
inline void install_mock_routes(httplib::Server& server, RequestLogger logger = {}) {
    using namespace server_detail;

    server.Post("/segment", [](const httplib::Request& req, httplib::Response& res) {
        nlohmann::json body;
        std::string image_b64;
        if (!parse_body(req, res, body) || !string_field(body, "image_png_b64", res, image_b64)) return;
        try {
            const ImageBuffer img = wire::image_from_b64(image_b64);
            reply_json(res, 200, {{"mask_png_b64", wire::soft_mask_to_b64(mock_segment(img))}});
        } catch (const Error& e) {
            reply_error(res, 400, e.what());
        }
    });

    server.Post("/generate", [](const httplib::Request& req, httplib::Response& res) {
        nlohmann::json body;
        std::string prompt;
        std::string mask_b64;
        if (!parse_body(req, res, body) || !string_field(body, "prompt", res, prompt) ||
            !string_field(body, "mask_png_b64", res, mask_b64)) {
            return;
        }
        if (prompt.empty()) {
            reply_error(res, 400, "prompt must not be empty");
            return;
        }
        std::uint64_t seed = 0;
        int steps = kDefaultSteps;
        bool avoid_mask = true;
        if (body.contains("seed")) {
            if (!body["seed"].is_number_integer()) {
                reply_error(res, 400, "seed must be an integer");
                return;
            }
            seed = body["seed"].is_number_unsigned() ? body["seed"].get<std::uint64_t>()
                                                     : static_cast<std::uint64_t>(body["seed"].get<std::int64_t>());
        }
        if (body.contains("steps")) {
            if (!body["steps"].is_number_integer() || body["steps"].get<std::int64_t>() < 1 ||
                body["steps"].get<std::int64_t>() > 100000) {
                reply_error(res, 400, "steps must be a positive integer");
                return;
            }
            steps = body["steps"].get<int>();
        }
        if (body.contains("avoid_mask")) {
            if (!body["avoid_mask"].is_boolean()) {
                reply_error(res, 400, "avoid_mask must be a boolean");
                return;
            }
            avoid_mask = body["avoid_mask"].get<bool>();
        }
        try {
            GenerationRequest gen{prompt, wire::mask_from_b64(mask_b64), seed, steps, avoid_mask};
            const ImageBuffer img = mock_generate(gen, gen.mask.width(), gen.mask.height());
            reply_json(res, 200, {{"image_png_b64", wire::image_to_b64(img)}});
        } catch (const Error& e) {
            reply_error(res, 400, e.what());
        }
    });

    const auto method_not_allowed = [](const httplib::Request&, httplib::Response& res) {
        res.set_header("Allow", "POST");
        reply_error(res, 405, "method not allowed");
    };
    server.Get("/segment", method_not_allowed);
    server.Get("/generate", method_not_allowed);

    server.Get("/health", [](const httplib::Request&, httplib::Response& res) {
        reply_json(res, 200, {{"status", "ready"}});
    });

    server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        std::string message = "internal error";
        try {
            if (ep) std::rethrow_exception(ep);
        } catch (const std::exception& e) {
            message = e.what();
        } catch (...) {
        }
        reply_error(res, 500, message);
    });

    if (logger) {
        server.set_logger(std::move(logger));
    }
}

}  // namespace copyaudit
