// Copyright 2026 The copyaudit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <string>
#include <vector>

#include "copyaudit/error.hpp"

namespace copyaudit {

/// Row-major raster with interleaved channels and intensities in [0, 1].
///
/// Only 1 (grayscale) and 3 (RGB) channels are representable. The
/// constructor rejects out-of-range or non-finite samples, so every live
/// ImageBuffer satisfies the buffer invariants.
class ImageBuffer {
public:
    ImageBuffer(int width, int height, int channels, std::vector<double> data)
        : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
        if (width < 1 || height < 1) {
            throw Error(ErrorKind::InvalidParameter, "image dimensions must be >= 1");
        }
        if (channels != 1 && channels != 3) {
            throw Error(ErrorKind::InvalidParameter,
                        "image must have 1 or 3 channels, got " + std::to_string(channels));
        }
        if (data_.size() != sample_count()) {
            throw Error(ErrorKind::InvalidParameter, "image data length does not match dimensions");
        }
        for (double v : data_) {
            if (!(v >= 0.0 && v <= 1.0)) {
                throw Error(ErrorKind::InvalidParameter, "image intensity outside [0, 1]");
            }
        }
    }

    /// Constant image.
    static ImageBuffer filled(int width, int height, int channels, double value) {
        const auto n = static_cast<std::size_t>(std::max(width, 0)) *
                       static_cast<std::size_t>(std::max(height, 0)) *
                       static_cast<std::size_t>(std::max(channels, 0));
        return ImageBuffer(width, height, channels, std::vector<double>(n, value));
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    int channels() const noexcept { return channels_; }
    std::size_t pixel_count() const noexcept {
        return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
    }
    std::size_t sample_count() const noexcept {
        return pixel_count() * static_cast<std::size_t>(channels_);
    }

    std::span<const double> data() const noexcept { return data_; }

    double at(int x, int y, int c = 0) const noexcept { return data_[index(x, y, c)]; }

    std::size_t index(int x, int y, int c = 0) const noexcept {
        return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
                static_cast<std::size_t>(x)) *
                   static_cast<std::size_t>(channels_) +
               static_cast<std::size_t>(c);
    }

    bool same_shape(const ImageBuffer& other) const noexcept {
        return width_ == other.width_ && height_ == other.height_ && channels_ == other.channels_;
    }

    friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;

private:
    int width_;
    int height_;
    int channels_;
    std::vector<double> data_;
};

/// 8-bit quantization used by the PNG codec.
inline int quantize8(double v) noexcept {
    return static_cast<int>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

/// BT.601 luminance. Grayscale input is returned unchanged.
inline ImageBuffer to_grayscale(const ImageBuffer& img) {
    if (img.channels() == 1) {
        return img;
    }
    std::vector<double> out(img.pixel_count());
    const auto src = img.data();
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double lum = 0.299 * src[3 * i] + 0.587 * src[3 * i + 1] + 0.114 * src[3 * i + 2];
        out[i] = std::clamp(lum, 0.0, 1.0);
    }
    return ImageBuffer(img.width(), img.height(), 1, std::move(out));
}

namespace detail {

struct BilinearTap {
    int lo;
    int hi;
    double frac;
};

// Half-pixel-centre mapping; identity when src_size == dst_size.
inline BilinearTap bilinear_tap(int dst, int src_size, int dst_size) noexcept {
    const double scale = static_cast<double>(src_size) / static_cast<double>(dst_size);
    double pos = (static_cast<double>(dst) + 0.5) * scale - 0.5;
    pos = std::clamp(pos, 0.0, static_cast<double>(src_size - 1));
    const int lo = static_cast<int>(std::floor(pos));
    const int hi = std::min(lo + 1, src_size - 1);
    return {lo, hi, pos - static_cast<double>(lo)};
}

// Bilinear resample of a row-major multi-channel field of arbitrary values.
inline std::vector<double> resample_bilinear(std::span<const double> src, int w, int h, int channels,
                                             int new_w, int new_h) {
    std::vector<double> out(static_cast<std::size_t>(new_w) * static_cast<std::size_t>(new_h) *
                            static_cast<std::size_t>(channels));
    const auto at = [&](int x, int y, int c) {
        return src[(static_cast<std::size_t>(y) * static_cast<std::size_t>(w) +
                    static_cast<std::size_t>(x)) *
                       static_cast<std::size_t>(channels) +
                   static_cast<std::size_t>(c)];
    };
    std::size_t k = 0;
    for (int y = 0; y < new_h; ++y) {
        const auto ty = bilinear_tap(y, h, new_h);
        for (int x = 0; x < new_w; ++x) {
            const auto tx = bilinear_tap(x, w, new_w);
            for (int c = 0; c < channels; ++c) {
                const double top = at(tx.lo, ty.lo, c) * (1.0 - tx.frac) + at(tx.hi, ty.lo, c) * tx.frac;
                const double bot = at(tx.lo, ty.hi, c) * (1.0 - tx.frac) + at(tx.hi, ty.hi, c) * tx.frac;
                out[k++] = top * (1.0 - ty.frac) + bot * ty.frac;
            }
        }
    }
    return out;
}

}  // namespace detail

inline ImageBuffer resize_bilinear(const ImageBuffer& img, int new_w, int new_h) {
    if (new_w < 1 || new_h < 1) {
        throw Error(ErrorKind::InvalidParameter, "resize target must be >= 1x1");
    }
    if (new_w == img.width() && new_h == img.height()) {
        return img;
    }
    auto out = detail::resample_bilinear(img.data(), img.width(), img.height(), img.channels(), new_w,
                                         new_h);
    for (double& v : out) {
        v = std::clamp(v, 0.0, 1.0);
    }
    return ImageBuffer(new_w, new_h, img.channels(), std::move(out));
}

/// Resize so that the longer side equals `longest`, preserving aspect ratio.
inline ImageBuffer resize_longest_side(const ImageBuffer& img, int longest) {
    if (longest < 1) {
        throw Error(ErrorKind::InvalidParameter, "target resolution must be >= 1");
    }
    const int current = std::max(img.width(), img.height());
    const double scale = static_cast<double>(longest) / static_cast<double>(current);
    const int w = img.width() >= img.height()
                      ? longest
                      : std::max(1, static_cast<int>(std::lround(img.width() * scale)));
    const int h = img.height() > img.width()
                      ? longest
                      : std::max(1, static_cast<int>(std::lround(img.height() * scale)));
    return resize_bilinear(img, w, h);
}

/// Converts the channel count so that two images can be compared sample-by-sample.
/// Equal channel counts pass through; otherwise both are reduced to luminance.
inline std::pair<ImageBuffer, ImageBuffer> harmonize_channels(const ImageBuffer& a,
                                                              const ImageBuffer& b) {
    if (a.channels() == b.channels()) {
        return {a, b};
    }
    return {to_grayscale(a), to_grayscale(b)};
}

}  // namespace copyaudit
