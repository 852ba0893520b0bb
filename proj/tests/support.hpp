// Copyright 2026 The copyaudit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "copyaudit/copyaudit.hpp"
#include "oracles.hpp"

namespace testsupport {

namespace fs = std::filesystem;

inline fs::path fixtures_dir() { return COPYAUDIT_FIXTURES_DIR; }

inline const std::vector<std::string>& fixture_names() {
    static const std::vector<std::string> names = {"portrait", "dog", "house", "tree", "car"};
    return names;
}

/// Fresh, empty directory under the system temp dir.
inline fs::path scratch_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("copyaudit_test_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

inline copyaudit::ImageBuffer random_image(std::mt19937_64& rng, int w, int h, int channels) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> data(static_cast<std::size_t>(w) * h * channels);
    for (double& v : data) v = u(rng);
    return copyaudit::ImageBuffer(w, h, channels, std::move(data));
}

/// Smooth random image: sum of a few random sinusoids, clamped to [0, 1].
inline copyaudit::ImageBuffer smooth_image(std::mt19937_64& rng, int w, int h, int channels) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> data(static_cast<std::size_t>(w) * h * channels);
    for (int c = 0; c < channels; ++c) {
        double fx[3], fy[3], ph[3];
        for (int k = 0; k < 3; ++k) {
            fx[k] = 0.05 + 0.3 * u(rng);
            fy[k] = 0.05 + 0.3 * u(rng);
            ph[k] = 6.28 * u(rng);
        }
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                double v = 0.5;
                for (int k = 0; k < 3; ++k) v += 0.12 * std::sin(fx[k] * x + fy[k] * y + ph[k]);
                data[(static_cast<std::size_t>(y) * w + x) * channels + c] = std::clamp(v, 0.0, 1.0);
            }
    }
    return copyaudit::ImageBuffer(w, h, channels, std::move(data));
}

inline oracle::Grid to_grid(const copyaudit::ImageBuffer& img, int channel = 0) {
    oracle::Grid g(img.height(), std::vector<double>(img.width()));
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x) g[y][x] = img.at(x, y, channel);
    return g;
}

inline copyaudit::ImageBuffer from_grid(const oracle::Grid& g) {
    std::vector<double> data;
    for (const auto& row : g) data.insert(data.end(), row.begin(), row.end());
    return copyaudit::ImageBuffer(static_cast<int>(g[0].size()), static_cast<int>(g.size()), 1, std::move(data));
}

/// httplib server on an ephemeral loopback port, served from a background thread.
/// A loopback port with nothing listening on it once this returns.
inline int free_port() {
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    socklen_t len = sizeof(addr);
    if (fd < 0 || ::bind(fd, reinterpret_cast<sockaddr*>(&addr), len) != 0 ||
        ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len) != 0) {
        throw std::runtime_error("free_port: cannot bind");
    }
    ::close(fd);
    return ntohs(addr.sin_port);
}

class ScopedServer {
public:
    explicit ScopedServer(const std::function<void(httplib::Server&)>& setup) {
        setup(server_);
        port_ = server_.bind_to_any_port("127.0.0.1");
        if (port_ <= 0) throw std::runtime_error("cannot bind test server");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ScopedServer(const ScopedServer&) = delete;
    ScopedServer& operator=(const ScopedServer&) = delete;
    ~ScopedServer() {
        server_.stop();
        if (thread_.joinable()) thread_.join();
    }

    int port() const noexcept { return port_; }
    std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

private:
    httplib::Server server_;
    int port_ = 0;
    std::thread thread_;
};

inline copyaudit::BackendEndpoint fast_endpoint(const std::string& url, int retries = 2) {
    copyaudit::BackendEndpoint ep;
    ep.base_url = url;
    ep.timeout_s = 5.0;
    ep.retries = retries;
    ep.backoff_s = 0.01;
    return ep;
}

}  // namespace testsupport
