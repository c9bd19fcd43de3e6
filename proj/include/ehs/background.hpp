#pragma once

// Multi-scale sliding-window estimate of the page background level.
//
// Starting from the largest power-of-two square that fits, windows are slid
// with stride ceil(w/5) (plus one position flush with the far border). Means
// of windows whose population std is below sigma_hat are collected and the
// largest becomes alpha. With no such window the side is halved; at w = 1
// every window qualifies, so alpha is the maximum intensity.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <tuple>
#include <utility>
#include <vector>

#include "ehs/image.hpp"

namespace ehs {

struct BackgroundParams {
    double sigma_hat = 3.0;

    void validate() const {
        if (!(sigma_hat > 0.0)) throw std::invalid_argument("BackgroundParams: sigma_hat must be positive");
    }
};

struct BackgroundResult {
    double alpha = 0.0;
    std::size_t origin_row = 0;
    std::size_t origin_col = 0;
    std::size_t window_size = 0;
    /// Window side at which detection succeeded (equals window_size).
    std::size_t scale_used = 0;
    /// Population std of the selected window.
    double window_std = 0.0;
};

/// Window positions along one axis of length len for window side w.
inline std::vector<std::size_t> window_positions(std::size_t len, std::size_t w) {
    std::vector<std::size_t> pos;
    if (w > len) return pos;
    const std::size_t stride = (w + 4) / 5;
    for (std::size_t p = 0; p + w <= len; p += stride) pos.push_back(p);
    if (pos.back() != len - w) pos.push_back(len - w);
    return pos;
}

/// Mean and population std of a w x w window, computed directly.
inline std::pair<double, double> window_stats(const Image& img, std::size_t r0, std::size_t c0, std::size_t w) {
    double sum = 0.0;
    for (std::size_t r = r0; r < r0 + w; ++r)
        for (std::size_t c = c0; c < c0 + w; ++c) sum += img(r, c);
    const double count = double(w * w);
    const double mean = sum / count;
    double ss = 0.0;
    for (std::size_t r = r0; r < r0 + w; ++r)
        for (std::size_t c = c0; c < c0 + w; ++c) ss += (img(r, c) - mean) * (img(r, c) - mean);
    return {mean, std::sqrt(ss / count)};
}

inline BackgroundResult detect_background(const Image& img, const BackgroundParams& params = {}) {
    params.validate();
    const std::size_t m = img.rows(), n = img.cols();

    // Summed-area tables of x and x^2 with a zero border row/column.
    std::vector<double> s1((m + 1) * (n + 1), 0.0), s2((m + 1) * (n + 1), 0.0);
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < n; ++c) {
            const double v = img(r, c);
            const std::size_t i = (r + 1) * (n + 1) + (c + 1);
            s1[i] = v + s1[i - 1] + s1[i - (n + 1)] - s1[i - (n + 1) - 1];
            s2[i] = v * v + s2[i - 1] + s2[i - (n + 1)] - s2[i - (n + 1) - 1];
        }
    auto box_sum = [&](const std::vector<double>& s, std::size_t r0, std::size_t c0, std::size_t w) {
        const std::size_t r1 = r0 + w, c1 = c0 + w;
        return s[r1 * (n + 1) + c1] - s[r0 * (n + 1) + c1] - s[r1 * (n + 1) + c0] + s[r0 * (n + 1) + c0];
    };

    std::size_t w = 1;
    while (2 * w <= std::min(m, n)) w *= 2;

    for (;; w /= 2) {
        const auto rows_at = window_positions(m, w);
        const auto cols_at = window_positions(n, w);
        const double count = double(w * w);
        bool found = false;
        BackgroundResult best;
        for (std::size_t r0 : rows_at)
            for (std::size_t c0 : cols_at) {
                double mean, sd;
                if (w == 1) {
                    mean = img(r0, c0);
                    sd = 0.0;
                } else {
                    mean = box_sum(s1, r0, c0, w) / count;
                    const double var = box_sum(s2, r0, c0, w) / count - mean * mean;
                    sd = std::sqrt(std::max(var, 0.0));
                    // The fast estimate loses precision near the bound; settle those directly.
                    if (std::abs(sd - params.sigma_hat) < 1e-6 * (1.0 + params.sigma_hat))
                        std::tie(mean, sd) = window_stats(img, r0, c0, w);
                }
                if (sd < params.sigma_hat && (!found || mean > best.alpha)) {
                    found = true;
                    best.alpha = mean;
                    best.origin_row = r0;
                    best.origin_col = c0;
                }
            }
        if (found) {
            best.window_size = best.scale_used = w;
            std::tie(best.alpha, best.window_std) = window_stats(img, best.origin_row, best.origin_col, w);
            return best;
        }
        if (w == 1) break;
    }
    throw std::logic_error("detect_background: unit windows always qualify");
}

}  // namespace ehs
