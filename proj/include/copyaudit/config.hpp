// Copyright 2026 The copyaudit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <openssl/evp.h>

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include "json.hpp"

#include "copyaudit/backends.hpp"
#include "copyaudit/blur.hpp"
#include "copyaudit/error.hpp"

namespace copyaudit {

struct PipelineConfig {
    double blur_sigma = 1.0;
    /// nullopt means ceil(3 * blur_sigma).
    std::optional<int> blur_radius;
    double mask_threshold = 0.5;
    int ssim_window = 11;
    int fid_patch = 16;
    int fid_stride = 8;
    std::uint64_t seed = 0;
    int steps = kDefaultSteps;
    /// nullopt selects the in-process mock backend.
    std::optional<BackendEndpoint> seg_endpoint;
    std::optional<BackendEndpoint> gen_endpoint;
    bool avoid_mask = true;
    int target_resolution = 512;

    int effective_blur_radius() const { return blur_radius.value_or(default_blur_radius(blur_sigma)); }

    void validate() const {
        const auto fail = [](const std::string& msg) { throw Error(ErrorKind::ConfigError, msg); };
        if (!(blur_sigma > 0.0) || !std::isfinite(blur_sigma)) fail("blur_sigma must be > 0");
        if (blur_radius && *blur_radius < 1) fail("blur_radius must be >= 1");
        if (!(mask_threshold >= 0.0 && mask_threshold <= 1.0)) fail("mask_threshold must lie in [0, 1]");
        if (ssim_window != 11) fail("ssim_window is fixed at 11");
        if (fid_patch < 2) fail("fid_patch must be >= 2");
        if (fid_stride < 1) fail("fid_stride must be >= 1");
        if (steps < 1) fail("steps must be >= 1");
        if (target_resolution < ssim_window) fail("target_resolution must be >= ssim_window");
        if (target_resolution > 8192) fail("target_resolution must be <= 8192");
        try {
            if (seg_endpoint) seg_endpoint->validate();
            if (gen_endpoint) gen_endpoint->validate();
        } catch (const Error& e) {
            fail(e.what());
        }
    }

    friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

namespace config_detail {

inline nlohmann::json endpoint_to_json(const std::optional<BackendEndpoint>& ep) {
    if (!ep) return "mock";
    return {{"base_url", ep->base_url}, {"timeout", ep->timeout_s}, {"retries", ep->retries}, {"backoff", ep->backoff_s}};
}

// Accepts "mock", a bare URL string, or an object with base_url and optional
// timeout / retries / backoff.
inline std::optional<BackendEndpoint> endpoint_from_json(const nlohmann::json& j, const std::string& field) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "mock") return std::nullopt;
        BackendEndpoint ep;
        ep.base_url = s;
        return ep;
    }
    if (!j.is_object()) {
        throw Error(ErrorKind::ConfigError, field + " must be \"mock\", a URL, or an object");
    }
    static const std::set<std::string> known = {"base_url", "timeout", "retries", "backoff"};
    for (const auto& [key, value] : j.items()) {
        if (!known.contains(key)) throw Error(ErrorKind::ConfigError, "unknown key " + field + "." + key);
    }
    BackendEndpoint ep;
    try {
        ep.base_url = j.at("base_url").get<std::string>();
        if (j.contains("timeout")) ep.timeout_s = j["timeout"].get<double>();
        if (j.contains("retries")) ep.retries = j["retries"].get<int>();
        if (j.contains("backoff")) ep.backoff_s = j["backoff"].get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ConfigError, field + ": " + e.what());
    }
    return ep;
}

}  // namespace config_detail

/// Canonical form: every field present, keys sorted, radius null when automatic.
inline nlohmann::json config_to_json(const PipelineConfig& cfg) {
    nlohmann::json j;
    j["blur_sigma"] = cfg.blur_sigma;
    j["blur_radius"] = cfg.blur_radius ? nlohmann::json(*cfg.blur_radius) : nlohmann::json(nullptr);
    j["mask_threshold"] = cfg.mask_threshold;
    j["ssim_window"] = cfg.ssim_window;
    j["fid_patch"] = cfg.fid_patch;
    j["fid_stride"] = cfg.fid_stride;
    j["seed"] = cfg.seed;
    j["steps"] = cfg.steps;
    j["seg_endpoint"] = config_detail::endpoint_to_json(cfg.seg_endpoint);
    j["gen_endpoint"] = config_detail::endpoint_to_json(cfg.gen_endpoint);
    j["avoid_mask"] = cfg.avoid_mask;
    j["target_resolution"] = cfg.target_resolution;
    return j;
}

/// Partial objects are allowed; missing fields keep their defaults.
/// Unknown keys and wrongly typed values are ConfigError.
inline PipelineConfig config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) {
        throw Error(ErrorKind::ConfigError, "config must be a JSON object");
    }
    PipelineConfig cfg;
    const auto defaults = config_to_json(cfg);
    for (const auto& [key, value] : j.items()) {
        if (!defaults.contains(key)) throw Error(ErrorKind::ConfigError, "unknown config key \"" + key + "\"");
    }
    try {
        if (j.contains("blur_sigma")) cfg.blur_sigma = j["blur_sigma"].get<double>();
        if (j.contains("blur_radius")) {
            if (j["blur_radius"].is_null()) cfg.blur_radius.reset();
            else cfg.blur_radius = j["blur_radius"].get<int>();
        }
        if (j.contains("mask_threshold")) cfg.mask_threshold = j["mask_threshold"].get<double>();
        if (j.contains("ssim_window")) cfg.ssim_window = j["ssim_window"].get<int>();
        if (j.contains("fid_patch")) cfg.fid_patch = j["fid_patch"].get<int>();
        if (j.contains("fid_stride")) cfg.fid_stride = j["fid_stride"].get<int>();
        if (j.contains("seed")) {
            const auto& seed = j["seed"];
            if (!seed.is_number_integer() || (!seed.is_number_unsigned() && seed.get<std::int64_t>() < 0)) {
                throw Error(ErrorKind::ConfigError, "seed must be a non-negative integer");
            }
            cfg.seed = j["seed"].get<std::uint64_t>();
        }
        if (j.contains("steps")) cfg.steps = j["steps"].get<int>();
        if (j.contains("avoid_mask")) cfg.avoid_mask = j["avoid_mask"].get<bool>();
        if (j.contains("target_resolution")) cfg.target_resolution = j["target_resolution"].get<int>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ConfigError, e.what());
    }
    if (j.contains("seg_endpoint")) cfg.seg_endpoint = config_detail::endpoint_from_json(j["seg_endpoint"], "seg_endpoint");
    if (j.contains("gen_endpoint")) cfg.gen_endpoint = config_detail::endpoint_from_json(j["gen_endpoint"], "gen_endpoint");
    cfg.validate();
    return cfg;
}

/// Layers config sources: later objects override earlier ones key by key.
/// Callers pass {file, flags} so that flag > file > default.
inline PipelineConfig resolve_config(std::initializer_list<nlohmann::json> layers) {
    nlohmann::json merged = nlohmann::json::object();
    for (const auto& layer : layers) {
        if (layer.is_null()) continue;
        if (!layer.is_object()) throw Error(ErrorKind::ConfigError, "config layer must be a JSON object");
        for (const auto& [key, value] : layer.items()) merged[key] = value;
    }
    return config_from_json(merged);
}

inline nlohmann::json read_json_file(const std::filesystem::path& path, ErrorKind kind) {
    std::ifstream in(path);
    if (!in) throw Error(kind, "cannot read " + path.string());
    auto j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw Error(kind, path.string() + " is not valid JSON");
    return j;
}

inline std::string sha256_hex(std::string_view text) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (EVP_Digest(text.data(), text.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
        throw Error(ErrorKind::IoError, "SHA-256 computation failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

inline std::string config_digest(const PipelineConfig& cfg) { return sha256_hex(config_to_json(cfg).dump()); }

}  // namespace copyaudit
