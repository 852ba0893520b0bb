// Copyright 2026 The copyaudit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "copyaudit/error.hpp"
#include "copyaudit/image.hpp"

namespace copyaudit {

/// Per-pixel object membership, row-major. true marks foreground.
class BinaryMask {
public:
    BinaryMask(int width, int height, std::vector<std::uint8_t> bits)
        : width_(width), height_(height), bits_(std::move(bits)) {
        if (width < 1 || height < 1) {
            throw Error(ErrorKind::InvalidParameter, "mask dimensions must be >= 1");
        }
        if (bits_.size() != pixel_count()) {
            throw Error(ErrorKind::InvalidParameter, "mask length does not match dimensions");
        }
        for (auto& b : bits_) {
            b = b ? 1 : 0;
        }
    }

    static BinaryMask filled(int width, int height, bool value) {
        return BinaryMask(width, height,
                          std::vector<std::uint8_t>(static_cast<std::size_t>(std::max(width, 0)) *
                                                        static_cast<std::size_t>(std::max(height, 0)),
                                                    value ? 1 : 0));
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t pixel_count() const noexcept {
        return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
    }
    bool at(int x, int y) const noexcept {
        return bits_[static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x)] != 0;
    }
    std::span<const std::uint8_t> bits() const noexcept { return bits_; }

    std::size_t count() const noexcept {
        return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
    }

    friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

private:
    int width_;
    int height_;
    std::vector<std::uint8_t> bits_;
};

/// Per-pixel foreground probability, row-major, values in [0, 1].
class SoftMask {
public:
    SoftMask(int width, int height, std::vector<double> probs)
        : width_(width), height_(height), probs_(std::move(probs)) {
        if (width < 1 || height < 1) {
            throw Error(ErrorKind::InvalidParameter, "mask dimensions must be >= 1");
        }
        if (probs_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
            throw Error(ErrorKind::InvalidParameter, "soft mask length does not match dimensions");
        }
        for (double p : probs_) {
            if (!(p >= 0.0 && p <= 1.0)) {
                throw Error(ErrorKind::InvalidParameter, "soft mask probability outside [0, 1]");
            }
        }
    }

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::span<const double> probs() const noexcept { return probs_; }

    friend bool operator==(const SoftMask&, const SoftMask&) = default;

private:
    int width_;
    int height_;
    std::vector<double> probs_;
};

inline constexpr double kDefaultMaskThreshold = 0.5;

inline BinaryMask threshold_mask(const SoftMask& soft, double t) {
    if (!(t >= 0.0 && t <= 1.0)) {
        throw Error(ErrorKind::InvalidThreshold, "mask threshold must lie in [0, 1]");
    }
    std::vector<std::uint8_t> bits(soft.probs().size());
    std::transform(soft.probs().begin(), soft.probs().end(), bits.begin(),
                   [t](double p) { return static_cast<std::uint8_t>(p >= t ? 1 : 0); });
    return BinaryMask(soft.width(), soft.height(), std::move(bits));
}

/// Bilinear resampling of the 0/1 field, re-thresholded at 0.5.
inline BinaryMask upsample_mask(const BinaryMask& mask, int new_w, int new_h) {
    if (new_w < 1 || new_h < 1) {
        throw Error(ErrorKind::InvalidParameter, "mask target must be >= 1x1");
    }
    if (new_w == mask.width() && new_h == mask.height()) {
        return mask;
    }
    std::vector<double> field(mask.bits().begin(), mask.bits().end());
    const auto resampled = detail::resample_bilinear(field, mask.width(), mask.height(), 1, new_w, new_h);
    std::vector<std::uint8_t> bits(resampled.size());
    std::transform(resampled.begin(), resampled.end(), bits.begin(),
                   [](double v) { return static_cast<std::uint8_t>(v >= 0.5 ? 1 : 0); });
    return BinaryMask(new_w, new_h, std::move(bits));
}

/// Intersection over union; 0.0 when both masks are empty.
inline double mask_iou(const BinaryMask& a, const BinaryMask& b) {
    if (a.width() != b.width() || a.height() != b.height()) {
        throw Error(ErrorKind::DimensionMismatch, "mask_iou requires equal mask dimensions");
    }
    std::size_t inter = 0;
    std::size_t uni = 0;
    const auto ab = a.bits();
    const auto bb = b.bits();
    for (std::size_t i = 0; i < ab.size(); ++i) {
        inter += static_cast<std::size_t>(ab[i] & bb[i]);
        uni += static_cast<std::size_t>(ab[i] | bb[i]);
    }
    if (uni == 0) {
        return 0.0;
    }
    return static_cast<double>(inter) / static_cast<double>(uni);
}

/// Keeps the largest 4-connected foreground component. Components are
/// discovered in row-major order, so on equal size the one whose first
/// pixel comes first wins.
inline BinaryMask largest_component_mask(const BinaryMask& mask) {
    const int w = mask.width();
    const int h = mask.height();
    const auto src = mask.bits();
    std::vector<std::int32_t> label(src.size(), -1);
    std::vector<std::size_t> stack;
    std::int32_t best_label = -1;
    std::size_t best_size = 0;
    std::int32_t next_label = 0;

    for (std::size_t start = 0; start < src.size(); ++start) {
        if (!src[start] || label[start] >= 0) {
            continue;
        }
        const std::int32_t id = next_label++;
        std::size_t size = 0;
        label[start] = id;
        stack.push_back(start);
        while (!stack.empty()) {
            const std::size_t p = stack.back();
            stack.pop_back();
            ++size;
            const int x = static_cast<int>(p % static_cast<std::size_t>(w));
            const int y = static_cast<int>(p / static_cast<std::size_t>(w));
            const auto visit = [&](int nx, int ny) {
                if (nx < 0 || ny < 0 || nx >= w || ny >= h) return;
                const std::size_t q = static_cast<std::size_t>(ny) * static_cast<std::size_t>(w) + static_cast<std::size_t>(nx);
                if (src[q] && label[q] < 0) {
                    label[q] = id;
                    stack.push_back(q);
                }
            };
            visit(x - 1, y);
            visit(x + 1, y);
            visit(x, y - 1);
            visit(x, y + 1);
        }
        if (size > best_size) {
            best_size = size;
            best_label = id;
        }
    }

    std::vector<std::uint8_t> bits(src.size(), 0);
    if (best_label >= 0) {
        for (std::size_t i = 0; i < bits.size(); ++i) {
            bits[i] = label[i] == best_label ? 1 : 0;
        }
    }
    return BinaryMask(w, h, std::move(bits));
}

/// Model-free segmentation: normalized absolute deviation of luminance from
/// its global mean. A constant image yields an all-zero map.
inline SoftMask fallback_segment(const ImageBuffer& img) {
    const ImageBuffer gray = to_grayscale(img);
    const auto lum = gray.data();
    std::vector<double> probs(lum.size(), 0.0);
    if (std::all_of(lum.begin(), lum.end(), [&](double v) { return v == lum[0]; })) {
        return SoftMask(img.width(), img.height(), std::move(probs));
    }
    double sum = 0.0;
    for (double v : lum) sum += v;
    const double mean = sum / static_cast<double>(lum.size());
    double max_dev = 0.0;
    for (std::size_t i = 0; i < lum.size(); ++i) {
        probs[i] = std::abs(lum[i] - mean);
        max_dev = std::max(max_dev, probs[i]);
    }
    for (double& p : probs) {
        p = std::clamp(p / max_dev, 0.0, 1.0);
    }
    return SoftMask(img.width(), img.height(), std::move(probs));
}

/// Masks travel as 8-bit grayscale images: 0 = false, 255 = true.
inline ImageBuffer mask_to_image(const BinaryMask& mask) {
    std::vector<double> data(mask.bits().begin(), mask.bits().end());
    return ImageBuffer(mask.width(), mask.height(), 1, std::move(data));
}

/// Reads a mask image back; luminance at or above 0.5 is foreground.
inline BinaryMask mask_from_image(const ImageBuffer& img) {
    const ImageBuffer gray = to_grayscale(img);
    std::vector<std::uint8_t> bits(gray.data().size());
    std::transform(gray.data().begin(), gray.data().end(), bits.begin(),
                   [](double v) { return static_cast<std::uint8_t>(v >= 0.5 ? 1 : 0); });
    return BinaryMask(img.width(), img.height(), std::move(bits));
}

inline ImageBuffer soft_mask_to_image(const SoftMask& soft) {
    return ImageBuffer(soft.width(), soft.height(), 1, std::vector<double>(soft.probs().begin(), soft.probs().end()));
}

inline SoftMask soft_mask_from_image(const ImageBuffer& img) {
    const ImageBuffer gray = to_grayscale(img);
    return SoftMask(img.width(), img.height(), std::vector<double>(gray.data().begin(), gray.data().end()));
}

}  // namespace copyaudit
