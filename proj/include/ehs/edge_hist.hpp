#pragma once

// Target edge-histogram construction: hard thresholding of gradients and the
// optional Gaussian pre-filter applied before the outer iterations.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <vector>

#include "ehs/gradients.hpp"
#include "ehs/image.hpp"

namespace ehs {

/// Keeps entries with |y| >= lambda, zeroes the rest.
inline GradientField threshold_field(const GradientField& g, double lambda) {
    if (!(lambda >= 0.0)) throw std::invalid_argument("threshold_field: lambda must be nonnegative");
    GradientField z = g;
    auto cut = [lambda](std::vector<double>& values) {
        for (double& y : values)
            if (!(std::abs(y) >= lambda)) y = 0.0;
    };
    cut(z.h);
    cut(z.v);
    return z;
}

inline std::size_t nnz(const GradientField& g) {
    std::size_t count = 0;
    for (double y : g.h) count += (y != 0.0);
    for (double y : g.v) count += (y != 0.0);
    return count;
}

/// Normalized sampled Gaussian, radius ceil(3 sigma), centre at index radius.
inline std::vector<double> gaussian_kernel(double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_kernel: sigma must be positive");
    const auto radius = static_cast<std::ptrdiff_t>(std::ceil(3.0 * sigma));
    std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
    double total = 0.0;
    for (std::ptrdiff_t i = -radius; i <= radius; ++i) {
        const double w = std::exp(-static_cast<double>(i * i) / (2.0 * sigma * sigma));
        k[static_cast<std::size_t>(i + radius)] = w;
        total += w;
    }
    for (double& w : k) w /= total;
    return k;
}

/// Separable Gaussian blur with periodic boundary. sigma == 0 is the identity.
inline Image gaussian_smooth(const Image& img, double sigma) {
    if (!(sigma >= 0.0)) throw std::invalid_argument("gaussian_smooth: sigma must be nonnegative");
    if (sigma == 0.0) return img;

    const auto kernel = gaussian_kernel(sigma);
    const auto radius = static_cast<std::ptrdiff_t>(kernel.size() / 2);
    const auto rows = static_cast<std::ptrdiff_t>(img.rows());
    const auto cols = static_cast<std::ptrdiff_t>(img.cols());
    auto wrap = [](std::ptrdiff_t i, std::ptrdiff_t n) { return ((i % n) + n) % n; };

    Image tmp(img.rows(), img.cols());
    for (std::ptrdiff_t r = 0; r < rows; ++r)
        for (std::ptrdiff_t c = 0; c < cols; ++c) {
            double s = 0.0;
            for (std::ptrdiff_t k = -radius; k <= radius; ++k)
                s += kernel[static_cast<std::size_t>(k + radius)] * img(r, wrap(c - k, cols));
            tmp(r, c) = s;
        }

    Image out(img.rows(), img.cols());
    for (std::ptrdiff_t r = 0; r < rows; ++r)
        for (std::ptrdiff_t c = 0; c < cols; ++c) {
            double s = 0.0;
            for (std::ptrdiff_t k = -radius; k <= radius; ++k)
                s += kernel[static_cast<std::size_t>(k + radius)] * tmp(wrap(r - k, rows), c);
            out(r, c) = s;
        }
    // Each output is a convex combination of inputs; the clamp only absorbs round-off.
    if (in_range(img.data())) out = clamp(out, kIntensityMin, kIntensityMax);
    return out;
}

struct HistogramBin {
    double low;
    double high;
    std::uint64_t count;
};

/// Histogram of the pooled h and v entries with unit-width bins
/// [b, b+1) for b = -255 .. 255.
inline std::vector<HistogramBin> gradient_histogram(const GradientField& g) {
    constexpr int lo = -255, hi = 255;
    std::vector<HistogramBin> bins;
    bins.reserve(hi - lo + 1);
    for (int b = lo; b <= hi; ++b) bins.push_back({double(b), double(b + 1), 0});
    auto add = [&](double y) {
        const double f = std::floor(y);
        const int idx = static_cast<int>(std::clamp(f, double(lo), double(hi))) - lo;
        ++bins[static_cast<std::size_t>(idx)].count;
    };
    for (double y : g.h) add(y);
    for (double y : g.v) add(y);
    return bins;
}

inline void write_histogram_csv(std::ostream& os, const std::vector<HistogramBin>& bins) {
    os << "bin_low,bin_high,count\n";
    for (const auto& b : bins) os << b.low << ',' << b.high << ',' << b.count << '\n';
}

}  // namespace ehs
