// Copyright 2026 The copyaudit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "copyaudit/error.hpp"
#include "copyaudit/image.hpp"

namespace copyaudit {

/// Sampled, normalized 1-D Gaussian. The 2-D kernel is its outer product
/// with itself, so the continuous 1/(2*pi*sigma^2) prefactor cancels.
class GaussianKernel {
public:
    double sigma() const noexcept { return sigma_; }
    int radius() const noexcept { return radius_; }
    std::span<const double> weights() const noexcept { return weights_; }

    friend GaussianKernel build_kernel(double sigma, int radius);

private:
    GaussianKernel(double sigma, int radius, std::vector<double> weights)
        : sigma_(sigma), radius_(radius), weights_(std::move(weights)) {}

    double sigma_;
    int radius_;
    std::vector<double> weights_;
};

inline GaussianKernel build_kernel(double sigma, int radius) {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw Error(ErrorKind::InvalidParameter, "blur sigma must be a positive finite number");
    }
    if (radius < 1) {
        throw Error(ErrorKind::InvalidParameter, "blur radius must be >= 1");
    }
    std::vector<double> w(static_cast<std::size_t>(2 * radius + 1));
    const double denom = 2.0 * sigma * sigma;
    for (int i = -radius; i <= radius; ++i) {
        w[static_cast<std::size_t>(i + radius)] = std::exp(-static_cast<double>(i * i) / denom);
    }
    double sum = 0.0;
    for (double v : w) sum += v;
    for (double& v : w) v /= sum;
    return GaussianKernel(sigma, radius, std::move(w));
}

/// ceil(3 sigma), never below 1.
inline int default_blur_radius(double sigma) {
    return std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
}

/// Reflect-101 border index: ... 2 1 | 0 1 2 ... n-1 | n-2 n-3 ...
inline int reflect101(int i, int n) noexcept {
    if (n == 1) {
        return 0;
    }
    while (i < 0 || i >= n) {
        if (i < 0) {
            i = -i;
        } else {
            i = 2 * n - 2 - i;
        }
    }
    return i;
}

/// Separable convolution, horizontal pass then vertical pass, per channel.
inline ImageBuffer gaussian_blur(const ImageBuffer& img, const GaussianKernel& kernel) {
    const int w = img.width();
    const int h = img.height();
    const int ch = img.channels();
    const int r = kernel.radius();
    const auto k = kernel.weights();
    const auto src = img.data();
    const auto idx = [&](int x, int y, int c) {
        return (static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)) *
                   static_cast<std::size_t>(ch) +
               static_cast<std::size_t>(c);
    };

    std::vector<double> tmp(src.size());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < ch; ++c) {
                double acc = 0.0;
                for (int t = -r; t <= r; ++t) {
                    acc += k[static_cast<std::size_t>(t + r)] * src[idx(reflect101(x + t, w), y, c)];
                }
                tmp[idx(x, y, c)] = acc;
            }
        }
    }

    std::vector<double> out(src.size());
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < ch; ++c) {
                double acc = 0.0;
                for (int t = -r; t <= r; ++t) {
                    acc += k[static_cast<std::size_t>(t + r)] * tmp[idx(x, reflect101(y + t, h), c)];
                }
                out[idx(x, y, c)] = std::clamp(acc, 0.0, 1.0);
            }
        }
    }
    return ImageBuffer(w, h, ch, std::move(out));
}

}  // namespace copyaudit
