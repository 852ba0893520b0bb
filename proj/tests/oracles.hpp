// Copyright 2026 The copyaudit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Independent reference computations used only by tests. Nothing here calls
// into the library's numeric code paths: each oracle re-derives its result
// by brute force, a different formula, or extended precision.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace oracle {

using Grid = std::vector<std::vector<double>>;  // [row][col]

/// Mirror index with period 2n-2 (reflect-101).
inline int mirror(int i, int n) {
    if (n == 1) return 0;
    const int period = 2 * n - 2;
    int m = i % period;
    if (m < 0) m += period;
    return m < n ? m : period - m;
}

inline std::vector<double> gaussian_taps(double sigma, int radius) {
    std::vector<double> w;
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        w.push_back(std::exp(-(i * i) / (2.0 * sigma * sigma)));
        sum += w.back();
    }
    for (double& v : w) v /= sum;
    return w;
}

/// Direct 2-D convolution with the outer-product kernel.
inline Grid conv2d(const Grid& img, double sigma, int radius) {
    const int h = static_cast<int>(img.size());
    const int w = static_cast<int>(img[0].size());
    const auto taps = gaussian_taps(sigma, radius);
    Grid out(h, std::vector<double>(w, 0.0));
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int dy = -radius; dy <= radius; ++dy)
                for (int dx = -radius; dx <= radius; ++dx)
                    acc += taps[dy + radius] * taps[dx + radius] * img[mirror(y + dy, h)][mirror(x + dx, w)];
            out[y][x] = acc;
        }
    return out;
}

/// SSIM as a literal double loop over every 11x11 window.
inline double ssim(const Grid& a, const Grid& b) {
    const int h = static_cast<int>(a.size());
    const int w = static_cast<int>(a[0].size());
    const auto taps = gaussian_taps(1.5, 5);
    const double c1 = 0.01 * 0.01;
    const double c2 = 0.03 * 0.03;
    double total = 0.0;
    int count = 0;
    for (int y = 0; y + 11 <= h; ++y)
        for (int x = 0; x + 11 <= w; ++x) {
            double ma = 0, mb = 0;
            for (int j = 0; j < 11; ++j)
                for (int i = 0; i < 11; ++i) {
                    const double g = taps[j] * taps[i];
                    ma += g * a[y + j][x + i];
                    mb += g * b[y + j][x + i];
                }
            double va = 0, vb = 0, cov = 0;
            for (int j = 0; j < 11; ++j)
                for (int i = 0; i < 11; ++i) {
                    const double g = taps[j] * taps[i];
                    const double da = a[y + j][x + i] - ma;
                    const double db = b[y + j][x + i] - mb;
                    va += g * da * da;
                    vb += g * db * db;
                    cov += g * da * db;
                }
            total += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
            ++count;
        }
    return total / count;
}

/// Covariance via E[xy] - E[x]E[y], rescaled to the unbiased divisor.
inline std::vector<std::vector<double>> covariance(const std::vector<std::vector<double>>& rows) {
    const std::size_t n = rows.size();
    const std::size_t d = rows[0].size();
    std::vector<double> mean(d, 0.0);
    std::vector<std::vector<double>> exy(d, std::vector<double>(d, 0.0));
    for (const auto& r : rows)
        for (std::size_t i = 0; i < d; ++i) {
            mean[i] += r[i] / n;
            for (std::size_t j = 0; j < d; ++j) exy[i][j] += r[i] * r[j] / n;
        }
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) exy[i][j] = (exy[i][j] - mean[i] * mean[j]) * n / (n - 1.0);
    return exy;
}

using LMat = std::vector<std::vector<long double>>;

/// Cyclic Jacobi eigendecomposition in long double. Returns eigenvalues;
/// eigenvectors are written column-wise into `vecs`.
inline std::vector<long double> jacobi_eigen(LMat a, LMat& vecs) {
    const std::size_t n = a.size();
    vecs.assign(n, std::vector<long double>(n, 0.0L));
    for (std::size_t i = 0; i < n; ++i) vecs[i][i] = 1.0L;
    for (int sweep = 0; sweep < 100; ++sweep) {
        long double off = 0.0L;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
        if (off < 1e-36L) break;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::fabs(a[p][q]) < 1e-300L) continue;
                const long double theta = (a[q][q] - a[p][p]) / (2.0L * a[p][q]);
                const long double t = (theta >= 0 ? 1.0L : -1.0L) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0L));
                const long double c = 1.0L / std::sqrt(t * t + 1.0L);
                const long double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const long double akp = a[k][p];
                    const long double akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const long double apk = a[p][k];
                    const long double aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const long double vkp = vecs[k][p];
                    const long double vkq = vecs[k][q];
                    vecs[k][p] = c * vkp - s * vkq;
                    vecs[k][q] = s * vkp + c * vkq;
                }
            }
    }
    std::vector<long double> eig(n);
    for (std::size_t i = 0; i < n; ++i) eig[i] = a[i][i];
    return eig;
}

inline LMat matmul(const LMat& a, const LMat& b) {
    const std::size_t n = a.size();
    LMat c(n, std::vector<long double>(n, 0.0L));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t j = 0; j < n; ++j) c[i][j] += a[i][k] * b[k][j];
    return c;
}

inline LMat sqrtm(const LMat& m) {
    LMat v;
    const auto eig = jacobi_eigen(m, v);
    const std::size_t n = m.size();
    LMat out(n, std::vector<long double>(n, 0.0L));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = 0; k < n; ++k) out[i][j] += v[i][k] * std::sqrt(std::max(eig[k], 0.0L)) * v[j][k];
    return out;
}

/// Frechet distance between Gaussians in extended precision.
inline long double frechet(const std::vector<double>& mu1, const LMat& s1, const std::vector<double>& mu2,
                           const LMat& s2) {
    const std::size_t n = mu1.size();
    const LMat r1 = sqrtm(s1);
    const LMat inner = matmul(matmul(r1, s2), r1);
    LMat v;
    const auto eig = jacobi_eigen(inner, v);
    long double tr_cross = 0.0L;
    for (long double e : eig) tr_cross += std::sqrt(std::max(e, 0.0L));
    long double value = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
        const long double d = static_cast<long double>(mu1[i]) - mu2[i];
        value += d * d + s1[i][i] + s2[i][i];
    }
    return value - 2.0L * tr_cross;
}

/// Random SPD matrix A A^T / d + shift * I.
inline std::vector<std::vector<double>> random_spd(std::mt19937_64& rng, std::size_t d, double shift) {
    std::normal_distribution<double> n01(0.0, 1.0);
    std::vector<std::vector<double>> a(d, std::vector<double>(d));
    for (auto& row : a)
        for (double& v : row) v = n01(rng);
    std::vector<std::vector<double>> s(d, std::vector<double>(d, 0.0));
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            for (std::size_t k = 0; k < d; ++k) s[i][j] += a[i][k] * a[j][k];
            s[i][j] /= static_cast<double>(d);
        }
    for (std::size_t i = 0; i < d; ++i) s[i][i] += shift;
    return s;
}

/// Bilinear sample of a grid at continuous coordinates using half-pixel
/// centres, evaluated straight from the four neighbours.
inline double bilinear_at(const Grid& g, int dst_x, int dst_y, int dst_w, int dst_h) {
    const int h = static_cast<int>(g.size());
    const int w = static_cast<int>(g[0].size());
    const double sx = std::clamp((dst_x + 0.5) * w / dst_w - 0.5, 0.0, w - 1.0);
    const double sy = std::clamp((dst_y + 0.5) * h / dst_h - 0.5, 0.0, h - 1.0);
    const int x0 = static_cast<int>(sx);
    const int y0 = static_cast<int>(sy);
    const int x1 = std::min(x0 + 1, w - 1);
    const int y1 = std::min(y0 + 1, h - 1);
    const double fx = sx - x0;
    const double fy = sy - y0;
    return g[y0][x0] * (1 - fx) * (1 - fy) + g[y0][x1] * fx * (1 - fy) + g[y1][x0] * (1 - fx) * fy +
           g[y1][x1] * fx * fy;
}

/// Recursive 4-connected flood fill; returns sizes and a label grid.
inline void flood(const std::vector<std::vector<int>>& bits, std::vector<std::vector<int>>& label, int x, int y,
                  int id, int& size) {
    const int h = static_cast<int>(bits.size());
    const int w = static_cast<int>(bits[0].size());
    if (x < 0 || y < 0 || x >= w || y >= h || !bits[y][x] || label[y][x] != -1) return;
    label[y][x] = id;
    ++size;
    flood(bits, label, x + 1, y, id, size);
    flood(bits, label, x - 1, y, id, size);
    flood(bits, label, x, y + 1, id, size);
    flood(bits, label, x, y - 1, id, size);
}

}  // namespace oracle
