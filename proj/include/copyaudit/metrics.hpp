// Copyright 2026 The copyaudit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "copyaudit/blur.hpp"
#include "copyaudit/error.hpp"
#include "copyaudit/image.hpp"

namespace copyaudit {

// ---------------------------------------------------------------------------
// SSIM

struct SsimParams {
    int window = 11;
    double window_sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
    double dynamic_range = 1.0;
};

namespace detail {

// Valid-mode separable filter over a single-channel field.
inline std::vector<double> filter_valid(std::span<const double> src, int w, int h, std::span<const double> k) {
    const int n = static_cast<int>(k.size());
    const int ow = w - n + 1;
    const int oh = h - n + 1;
    std::vector<double> rows(static_cast<std::size_t>(ow) * static_cast<std::size_t>(h));
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int t = 0; t < n; ++t) {
                acc += k[static_cast<std::size_t>(t)] * src[static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x + t)];
            }
            rows[static_cast<std::size_t>(y) * static_cast<std::size_t>(ow) + static_cast<std::size_t>(x)] = acc;
        }
    }
    std::vector<double> out(static_cast<std::size_t>(ow) * static_cast<std::size_t>(oh));
    for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x) {
            double acc = 0.0;
            for (int t = 0; t < n; ++t) {
                acc += k[static_cast<std::size_t>(t)] * rows[static_cast<std::size_t>(y + t) * static_cast<std::size_t>(ow) + static_cast<std::size_t>(x)];
            }
            out[static_cast<std::size_t>(y) * static_cast<std::size_t>(ow) + static_cast<std::size_t>(x)] = acc;
        }
    }
    return out;
}

}  // namespace detail

/// Mean SSIM over every valid window position, computed on luminance.
inline double ssim(const ImageBuffer& a, const ImageBuffer& b, const SsimParams& params = {}) {
    if (a.width() != b.width() || a.height() != b.height()) {
        throw Error(ErrorKind::DimensionMismatch, "ssim requires equal image dimensions");
    }
    if (a.width() < params.window || a.height() < params.window) {
        throw Error(ErrorKind::ImageTooSmall,
                    "ssim requires both sides >= " + std::to_string(params.window) + " pixels");
    }
    const ImageBuffer ga = to_grayscale(a);
    const ImageBuffer gb = to_grayscale(b);
    const int w = ga.width();
    const int h = ga.height();
    const auto pa = ga.data();
    const auto pb = gb.data();

    const auto kernel = build_kernel(params.window_sigma, params.window / 2);
    const auto k = kernel.weights();

    std::vector<double> aa(pa.size());
    std::vector<double> bb(pa.size());
    std::vector<double> ab(pa.size());
    for (std::size_t i = 0; i < pa.size(); ++i) {
        aa[i] = pa[i] * pa[i];
        bb[i] = pb[i] * pb[i];
        ab[i] = pa[i] * pb[i];
    }
    const auto mu_a = detail::filter_valid(pa, w, h, k);
    const auto mu_b = detail::filter_valid(pb, w, h, k);
    const auto e_aa = detail::filter_valid(aa, w, h, k);
    const auto e_bb = detail::filter_valid(bb, w, h, k);
    const auto e_ab = detail::filter_valid(ab, w, h, k);

    const double c1 = (params.k1 * params.dynamic_range) * (params.k1 * params.dynamic_range);
    const double c2 = (params.k2 * params.dynamic_range) * (params.k2 * params.dynamic_range);
    double total = 0.0;
    for (std::size_t i = 0; i < mu_a.size(); ++i) {
        const double ma = mu_a[i];
        const double mb = mu_b[i];
        const double va = e_aa[i] - ma * ma;
        const double vb = e_bb[i] - mb * mb;
        const double cov = e_ab[i] - ma * mb;
        total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
    }
    return total / static_cast<double>(mu_a.size());
}

// ---------------------------------------------------------------------------
// PSNR

/// 10 log10(L^2 / MSE) with L = 1; +infinity when the images are identical.
inline double psnr(const ImageBuffer& a, const ImageBuffer& b) {
    if (!a.same_shape(b)) {
        throw Error(ErrorKind::DimensionMismatch, "psnr requires equal dimensions and channels");
    }
    const auto pa = a.data();
    const auto pb = b.data();
    double sse = 0.0;
    for (std::size_t i = 0; i < pa.size(); ++i) {
        const double d = pa[i] - pb[i];
        sse += d * d;
    }
    const double mse = sse / static_cast<double>(pa.size());
    if (mse == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return 10.0 * std::log10(1.0 / mse);
}

// ---------------------------------------------------------------------------
// Feature statistics and Frechet distance

/// One feature vector per row.
using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct GaussianStats {
    Eigen::VectorXd mu;
    Eigen::MatrixXd sigma;
};

inline constexpr double kCovarianceEpsilon = 1e-6;

/// Patch-statistics features: for each channel, the patch mean, population
/// standard deviation, and mean absolute horizontal and vertical forward
/// differences. Rows follow raster order of patch positions.
inline FeatureMatrix extract_patch_features(const ImageBuffer& img, int patch, int stride) {
    if (patch < 2) {
        throw Error(ErrorKind::InvalidParameter, "feature patch must be >= 2");
    }
    if (stride < 1) {
        throw Error(ErrorKind::InvalidParameter, "feature stride must be >= 1");
    }
    if (patch > std::min(img.width(), img.height())) {
        throw Error(ErrorKind::ImageTooSmall, "feature patch larger than image");
    }
    const int nx = (img.width() - patch) / stride + 1;
    const int ny = (img.height() - patch) / stride + 1;
    const int ch = img.channels();
    FeatureMatrix f(static_cast<Eigen::Index>(nx) * ny, 4 * ch);
    const double area = static_cast<double>(patch) * patch;
    const double grad_pairs = static_cast<double>(patch) * (patch - 1);

    Eigen::Index row = 0;
    for (int py = 0; py < ny; ++py) {
        for (int px = 0; px < nx; ++px) {
            const int x0 = px * stride;
            const int y0 = py * stride;
            for (int c = 0; c < ch; ++c) {
                double sum = 0.0;
                for (int y = y0; y < y0 + patch; ++y)
                    for (int x = x0; x < x0 + patch; ++x) sum += img.at(x, y, c);
                const double mean = sum / area;
                double ss = 0.0;
                double gx = 0.0;
                double gy = 0.0;
                for (int y = y0; y < y0 + patch; ++y) {
                    for (int x = x0; x < x0 + patch; ++x) {
                        const double v = img.at(x, y, c);
                        ss += (v - mean) * (v - mean);
                        if (x + 1 < x0 + patch) gx += std::abs(img.at(x + 1, y, c) - v);
                        if (y + 1 < y0 + patch) gy += std::abs(img.at(x, y + 1, c) - v);
                    }
                }
                f(row, 4 * c + 0) = mean;
                f(row, 4 * c + 1) = std::sqrt(ss / area);
                f(row, 4 * c + 2) = gx / grad_pairs;
                f(row, 4 * c + 3) = gy / grad_pairs;
            }
            ++row;
        }
    }
    return f;
}

/// Sample mean and unbiased covariance plus epsilon * I.
inline GaussianStats estimate_stats(const FeatureMatrix& f, double epsilon = kCovarianceEpsilon) {
    const Eigen::Index n = f.rows();
    const Eigen::Index d = f.cols();
    if (n < 2) {
        throw Error(ErrorKind::InsufficientSamples, "statistics need at least 2 samples");
    }
    if (d < 1) {
        throw Error(ErrorKind::InvalidParameter, "feature dimension must be >= 1");
    }
    if (!f.allFinite()) {
        throw Error(ErrorKind::InvalidParameter, "feature matrix contains non-finite values");
    }
    Eigen::VectorXd mu = f.colwise().mean().transpose();
    // One refinement pass removes the rounding left by sum/n.
    mu += (f.rowwise() - mu.transpose()).colwise().mean().transpose();
    const Eigen::MatrixXd centered = f.rowwise() - mu.transpose();
    Eigen::MatrixXd sigma = (centered.transpose() * centered) / static_cast<double>(n - 1);
    sigma = 0.5 * (sigma + sigma.transpose());
    sigma.diagonal().array() += epsilon;
    return {std::move(mu), std::move(sigma)};
}

/// Symmetric PSD square root via eigendecomposition; negative eigenvalues
/// produced by rounding are clamped to zero.
inline Eigen::MatrixXd sqrtm_psd(const Eigen::MatrixXd& m) {
    const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    if (es.info() != Eigen::Success) {
        throw Error(ErrorKind::NumericalFailure, "eigendecomposition did not converge");
    }
    const Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
}

/// ||mu1 - mu2||^2 + Tr(S1 + S2 - 2 (S1 S2)^{1/2}), clamped at zero.
///
/// Tr((S1 S2)^{1/2}) is evaluated as the sum of square roots of the
/// eigenvalues of the symmetric matrix S1^{1/2} S2 S1^{1/2}, which shares
/// its spectrum with S1 S2.
inline double frechet_distance(const GaussianStats& p, const GaussianStats& q) {
    const Eigen::Index d = p.mu.size();
    if (q.mu.size() != d || p.sigma.rows() != d || p.sigma.cols() != d || q.sigma.rows() != d ||
        q.sigma.cols() != d) {
        throw Error(ErrorKind::DimensionMismatch, "frechet_distance requires equal dimensions");
    }
    const Eigen::MatrixXd root1 = sqrtm_psd(p.sigma);
    Eigen::MatrixXd inner = root1 * q.sigma * root1;
    inner = 0.5 * (inner + inner.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(inner, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) {
        throw Error(ErrorKind::NumericalFailure, "eigendecomposition did not converge");
    }
    const double tr_cross = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
    const double mean_term = (p.mu - q.mu).squaredNorm();
    const double value = mean_term + p.sigma.trace() + q.sigma.trace() - 2.0 * tr_cross;
    return std::max(0.0, value);
}

/// Features enter the per-image FID in 8-bit intensity units.
inline constexpr double kFidFeatureScale = 255.0;

/// Per-image-pair FID: each image contributes its overlapping patches as a
/// sample set. Features are multiplied by `feature_scale` before the
/// statistics are estimated, so the distance scales by feature_scale^2.
inline double fid_images(const ImageBuffer& a, const ImageBuffer& b, int patch, int stride,
                         double feature_scale = kFidFeatureScale) {
    if (a.channels() != b.channels()) {
        throw Error(ErrorKind::DimensionMismatch, "fid_images requires equal channel counts");
    }
    const FeatureMatrix fa = feature_scale * extract_patch_features(a, patch, stride);
    const FeatureMatrix fb = feature_scale * extract_patch_features(b, patch, stride);
    return frechet_distance(estimate_stats(fa), estimate_stats(fb));
}

// ---------------------------------------------------------------------------
// Band classification

enum class Band { VeryLow = 0, Low = 1, Moderate = 2, High = 3 };

/// Severity label for a band. The lowest SSIM band reads "poor".
inline std::string_view fid_band_label(Band b) noexcept {
    switch (b) {
    case Band::High: return "high";
    case Band::Moderate: return "moderate";
    case Band::Low: return "low";
    case Band::VeryLow: return "very-low";
    }
    return "very-low";
}

inline std::string_view ssim_band_label(Band b) noexcept {
    return b == Band::VeryLow ? std::string_view("poor") : fid_band_label(b);
}

inline std::string_view risk_label(Band b) noexcept { return fid_band_label(b); }

struct MetricBands {
    std::array<double, 3> fid_edges{10.0, 30.0, 50.0};
    std::array<double, 3> ssim_edges{0.5, 0.7, 0.9};

    void validate() const {
        const auto increasing = [](const std::array<double, 3>& e) {
            return std::isfinite(e[0]) && std::isfinite(e[2]) && e[0] < e[1] && e[1] < e[2];
        };
        if (!increasing(fid_edges) || !increasing(ssim_edges)) {
            throw Error(ErrorKind::InvalidParameter, "band edges must be strictly increasing");
        }
    }
};

struct Classification {
    Band ssim_band;
    Band fid_band;
    Band overall_risk;

    friend bool operator==(const Classification&, const Classification&) = default;
};

/// FID: [0,e0) high, [e0,e1] moderate, (e1,e2] low, above e2 very-low.
/// SSIM: >=e2 high, [e1,e2) moderate, [e0,e1) low, below e0 poor.
/// The overall risk is the more severe of the two.
inline Classification classify(double ssim_value, double fid_value, const MetricBands& bands = {}) {
    bands.validate();
    if (std::isnan(fid_value) || fid_value < 0.0) {
        throw Error(ErrorKind::OutOfRange, "fid must be >= 0");
    }
    if (std::isnan(ssim_value) || ssim_value < -1.0 || ssim_value > 1.0) {
        throw Error(ErrorKind::OutOfRange, "ssim must lie in [-1, 1]");
    }
    const auto& fe = bands.fid_edges;
    const Band fid_band = fid_value < fe[0]    ? Band::High
                          : fid_value <= fe[1] ? Band::Moderate
                          : fid_value <= fe[2] ? Band::Low
                                               : Band::VeryLow;
    const auto& se = bands.ssim_edges;
    const Band ssim_band = ssim_value >= se[2]   ? Band::High
                           : ssim_value >= se[1] ? Band::Moderate
                           : ssim_value >= se[0] ? Band::Low
                                                 : Band::VeryLow;
    return {ssim_band, fid_band, std::max(ssim_band, fid_band)};
}

struct SimilarityReport {
    double ssim = 0.0;
    double fid = 0.0;
    double psnr = 0.0;
    double mask_iou = 0.0;
    Classification bands{Band::VeryLow, Band::VeryLow, Band::VeryLow};
    std::string config_digest;
};

}  // namespace copyaudit
