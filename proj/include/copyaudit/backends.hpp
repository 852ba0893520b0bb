// Copyright 2026 The copyaudit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Segmentation and generation stages. Each stage has an HTTP client that
// speaks the JSON/base64-PNG protocol and an in-process mock that needs no
// ML stack. Both mocks quantize to 8 bits so that in-process and over-the-
// wire mock runs produce identical results.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "copyaudit/detail/httplib.hpp"
#include "json.hpp"

#include "copyaudit/error.hpp"
#include "copyaudit/image.hpp"
#include "copyaudit/mask.hpp"
#include "copyaudit/wire.hpp"

namespace copyaudit {

struct BackendEndpoint {
    std::string base_url;
    double timeout_s = 120.0;
    int retries = 2;
    /// First retry delay; doubles on each further retry (1 s, 2 s, ...).
    double backoff_s = 1.0;

    void validate() const {
        if (base_url.empty()) {
            throw Error(ErrorKind::InvalidParameter, "endpoint base_url is empty");
        }
        if (!(timeout_s > 0.0)) {
            throw Error(ErrorKind::InvalidParameter, "endpoint timeout must be > 0");
        }
        if (retries < 0) {
            throw Error(ErrorKind::InvalidParameter, "endpoint retries must be >= 0");
        }
        if (!(backoff_s >= 0.0)) {
            throw Error(ErrorKind::InvalidParameter, "endpoint backoff must be >= 0");
        }
    }

    friend bool operator==(const BackendEndpoint&, const BackendEndpoint&) = default;
};

inline constexpr int kDefaultSteps = 30;

struct GenerationRequest {
    std::string prompt;
    BinaryMask mask;
    std::uint64_t seed = 0;
    int steps = kDefaultSteps;
    bool avoid_mask = true;

    void validate() const {
        if (prompt.empty()) {
            throw Error(ErrorKind::InvalidRequest, "prompt must not be empty");
        }
        if (steps < 1) {
            throw Error(ErrorKind::InvalidRequest, "steps must be >= 1");
        }
    }
};

// ---------------------------------------------------------------------------
// HTTP transport

namespace http_detail {

struct SplitUrl {
    std::string origin;  // scheme://host[:port]
    std::string prefix;  // path prefix without trailing slash
};

inline SplitUrl split_base_url(const std::string& base_url) {
    static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(base_url, m, re)) {
        throw Error(ErrorKind::InvalidParameter, "endpoint base_url is not an http(s) URL: " + base_url);
    }
    std::string prefix = m[2].matched ? m[2].str() : std::string();
    while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    return {m[1].str(), prefix};
}

inline std::string error_message_from_body(const std::string& body) {
    const auto parsed = nlohmann::json::parse(body, nullptr, false);
    if (parsed.is_object() && parsed.contains("error") && parsed["error"].is_string()) {
        return parsed["error"].get<std::string>();
    }
    return body.substr(0, 200);
}

}  // namespace http_detail

/// POSTs a JSON body and returns the parsed 200 response.
///
/// Transport failures, timeouts and 5xx responses are retried up to
/// endpoint.retries times with exponential backoff. 4xx and malformed
/// responses fail immediately with ProtocolError. When every attempt fails
/// the last failure decides the error: Timeout if it timed out, otherwise
/// BackendUnavailable.
inline nlohmann::json post_json(const BackendEndpoint& endpoint, std::string_view route,
                                const nlohmann::json& body) {
    endpoint.validate();
    const auto url = http_detail::split_base_url(endpoint.base_url);
    const std::string path = url.prefix + std::string(route);
    const std::string payload = body.dump();
    const auto timeout = std::chrono::duration<double>(endpoint.timeout_s);
    const auto timeout_us = std::chrono::duration_cast<std::chrono::microseconds>(timeout);

    ErrorKind last_kind = ErrorKind::BackendUnavailable;
    std::string last_message;
    for (int attempt = 0; attempt <= endpoint.retries; ++attempt) {
        if (attempt > 0) {
            const double delay = endpoint.backoff_s * std::pow(2.0, attempt - 1);
            std::this_thread::sleep_for(std::chrono::duration<double>(delay));
        }
        httplib::Client client(url.origin);
        client.set_connection_timeout(timeout_us);
        client.set_read_timeout(timeout_us);
        client.set_write_timeout(timeout_us);
        auto res = client.Post(path, payload, "application/json");
        if (!res) {
            const auto err = res.error();
            last_kind = (err == httplib::Error::Read || err == httplib::Error::ConnectionTimeout)
                            ? ErrorKind::Timeout
                            : ErrorKind::BackendUnavailable;
            last_message = httplib::to_string(err);
            continue;
        }
        if (res->status >= 500) {
            last_kind = ErrorKind::BackendUnavailable;
            last_message = "HTTP " + std::to_string(res->status) + ": " +
                           http_detail::error_message_from_body(res->body);
            continue;
        }
        if (res->status != 200) {
            throw Error(ErrorKind::ProtocolError, "HTTP " + std::to_string(res->status) + " from " + path +
                                                      ": " + http_detail::error_message_from_body(res->body));
        }
        auto parsed = nlohmann::json::parse(res->body, nullptr, false);
        if (parsed.is_discarded() || !parsed.is_object()) {
            throw Error(ErrorKind::ProtocolError, "response from " + path + " is not a JSON object");
        }
        return parsed;
    }
    const int attempts = endpoint.retries + 1;
    throw Error(last_kind, path + " failed after " + std::to_string(attempts) +
                               (attempts == 1 ? " attempt: " : " attempts: ") + last_message);
}

namespace http_detail {

inline std::string require_string(const nlohmann::json& obj, const char* key) {
    const auto it = obj.find(key);
    if (it == obj.end() || !it->is_string()) {
        throw Error(ErrorKind::ProtocolError, std::string("response lacks string field \"") + key + "\"");
    }
    return it->get<std::string>();
}

}  // namespace http_detail

/// POST {base_url}/segment.
inline SoftMask segment(const BackendEndpoint& endpoint, const ImageBuffer& img) {
    const auto response = post_json(endpoint, "/segment", {{"image_png_b64", wire::image_to_b64(img)}});
    SoftMask soft = wire::soft_mask_from_b64(http_detail::require_string(response, "mask_png_b64"));
    if (soft.width() != img.width() || soft.height() != img.height()) {
        throw Error(ErrorKind::ProtocolError, "segmentation mask is " + std::to_string(soft.width()) + "x" +
                                                  std::to_string(soft.height()) + ", expected " +
                                                  std::to_string(img.width()) + "x" +
                                                  std::to_string(img.height()));
    }
    return soft;
}

inline nlohmann::json generation_request_json(const GenerationRequest& req) {
    nlohmann::json body;
    body["prompt"] = req.prompt;
    body["mask_png_b64"] = wire::mask_to_b64(req.mask);
    body["seed"] = req.seed;
    body["steps"] = req.steps;
    body["avoid_mask"] = req.avoid_mask;
    return body;
}

/// POST {base_url}/generate. The request is validated before any network traffic.
inline ImageBuffer generate(const BackendEndpoint& endpoint, const GenerationRequest& req) {
    req.validate();
    const auto response = post_json(endpoint, "/generate", generation_request_json(req));
    ImageBuffer img = wire::image_from_b64(http_detail::require_string(response, "image_png_b64"));
    if (img.width() != req.mask.width() || img.height() != req.mask.height()) {
        throw Error(ErrorKind::ProtocolError, "generated image dimensions differ from the mask");
    }
    return img;
}

// ---------------------------------------------------------------------------
// Mock generation

namespace mock_detail {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<std::uint8_t>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Lattice value in [0, 1) from the top 53 bits of a mixed hash.
inline double lattice(std::uint64_t key, std::uint64_t gx, std::uint64_t gy, std::uint64_t c) noexcept {
    std::uint64_t h = splitmix64(key ^ splitmix64(gx));
    h = splitmix64(h ^ splitmix64(gy + 0x632be59bd9b4e019ULL));
    h = splitmix64(h ^ c);
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

inline constexpr int kLatticeCell = 8;
inline constexpr double kMaskPull = 0.8;

}  // namespace mock_detail

/// Deterministic stand-in for mask-conditioned diffusion.
///
/// RGB value noise on a lattice at 1/8 resolution, bilinearly interpolated
/// and keyed by (prompt hash, seed). With avoid_mask, pixels inside the mask
/// are pulled toward the image's per-channel mean with weight 0.8, erasing
/// the mask's shape; without it they are pulled toward white, reproducing it.
/// The result is quantized to 8 bits.
inline ImageBuffer mock_generate(const GenerationRequest& req, int width, int height) {
    using namespace mock_detail;
    req.validate();
    if (req.mask.width() != width || req.mask.height() != height) {
        throw Error(ErrorKind::DimensionMismatch, "mock_generate dimensions differ from the mask");
    }
    const std::uint64_t key = splitmix64(fnv1a64(req.prompt) ^ splitmix64(req.seed));
    const int ch = 3;
    std::vector<double> data(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * ch);
    std::size_t k = 0;
    for (int y = 0; y < height; ++y) {
        const int gy = y / kLatticeCell;
        const double fy = static_cast<double>(y % kLatticeCell) / kLatticeCell;
        for (int x = 0; x < width; ++x) {
            const int gx = x / kLatticeCell;
            const double fx = static_cast<double>(x % kLatticeCell) / kLatticeCell;
            for (int c = 0; c < ch; ++c) {
                const auto ux = static_cast<std::uint64_t>(gx);
                const auto uy = static_cast<std::uint64_t>(gy);
                const auto uc = static_cast<std::uint64_t>(c);
                const double v00 = lattice(key, ux, uy, uc);
                const double v10 = lattice(key, ux + 1, uy, uc);
                const double v01 = lattice(key, ux, uy + 1, uc);
                const double v11 = lattice(key, ux + 1, uy + 1, uc);
                const double top = v00 + (v10 - v00) * fx;
                const double bot = v01 + (v11 - v01) * fx;
                data[k++] = top + (bot - top) * fy;
            }
        }
    }

    std::vector<double> mean(ch, 0.0);
    for (std::size_t i = 0; i < data.size(); ++i) mean[i % ch] += data[i];
    for (double& m : mean) m /= static_cast<double>(req.mask.pixel_count());

    const auto bits = req.mask.bits();
    for (std::size_t p = 0; p < bits.size(); ++p) {
        if (!bits[p]) continue;
        for (int c = 0; c < ch; ++c) {
            double& v = data[p * ch + static_cast<std::size_t>(c)];
            const double target = req.avoid_mask ? mean[static_cast<std::size_t>(c)] : 1.0;
            v = (1.0 - kMaskPull) * v + kMaskPull * target;
        }
    }
    for (double& v : data) {
        v = quantize8(v) / 255.0;
    }
    return ImageBuffer(width, height, ch, std::move(data));
}

/// Fallback segmentation quantized to the 8-bit wire representation.
inline SoftMask mock_segment(const ImageBuffer& img) {
    const SoftMask soft = fallback_segment(img);
    std::vector<double> probs(soft.probs().size());
    std::transform(soft.probs().begin(), soft.probs().end(), probs.begin(),
                   [](double p) { return quantize8(p) / 255.0; });
    return SoftMask(soft.width(), soft.height(), std::move(probs));
}

// ---------------------------------------------------------------------------
// Stage interfaces

class SegmentationBackend {
public:
    virtual ~SegmentationBackend() = default;
    virtual SoftMask segment(const ImageBuffer& img) const = 0;
};

class GenerationBackend {
public:
    virtual ~GenerationBackend() = default;
    virtual ImageBuffer generate(const GenerationRequest& req) const = 0;
};

class MockSegmentation final : public SegmentationBackend {
public:
    SoftMask segment(const ImageBuffer& img) const override { return mock_segment(img); }
};

class MockGeneration final : public GenerationBackend {
public:
    ImageBuffer generate(const GenerationRequest& req) const override {
        return mock_generate(req, req.mask.width(), req.mask.height());
    }
};

class HttpSegmentation final : public SegmentationBackend {
public:
    explicit HttpSegmentation(BackendEndpoint endpoint) : endpoint_(std::move(endpoint)) {}
    SoftMask segment(const ImageBuffer& img) const override { return copyaudit::segment(endpoint_, img); }

private:
    BackendEndpoint endpoint_;
};

class HttpGeneration final : public GenerationBackend {
public:
    explicit HttpGeneration(BackendEndpoint endpoint) : endpoint_(std::move(endpoint)) {}
    ImageBuffer generate(const GenerationRequest& req) const override {
        return copyaudit::generate(endpoint_, req);
    }

private:
    BackendEndpoint endpoint_;
};

/// nullopt selects the in-process mock.
inline std::unique_ptr<SegmentationBackend> make_segmentation_backend(const std::optional<BackendEndpoint>& ep) {
    if (!ep) return std::make_unique<MockSegmentation>();
    return std::make_unique<HttpSegmentation>(*ep);
}

inline std::unique_ptr<GenerationBackend> make_generation_backend(const std::optional<BackendEndpoint>& ep) {
    if (!ep) return std::make_unique<MockGeneration>();
    return std::make_unique<HttpGeneration>(*ep);
}

}  // namespace copyaudit
