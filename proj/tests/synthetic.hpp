#pragma once

// Synthetic scenes with known structure, shared by the pipeline tests and the
// acceptance suite.

#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "ehs/image.hpp"

namespace synth {

/// Left half 100, right half 160 (a +60 step at column cols/2; under periodic
/// wrap column 0 carries the matching -60 step), plus integer texture in
/// [0, 8], so every texture difference has magnitude <= 8.
struct StepScene {
    ehs::Image image;
    std::size_t step_col;
};

inline StepScene step_with_texture(std::size_t rows, std::size_t cols, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_int_distribution<int> tex(0, 8);
    ehs::Image img(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) img(r, c) = (c < cols / 2 ? 100.0 : 160.0) + tex(rng);
    return {img, cols / 2};
}

/// Squared gradient energy of the texture: all vertical differences and the
/// horizontal differences that do not straddle a step column.
inline double texture_energy(const ehs::Image& x, std::size_t step_col) {
    const std::size_t m = x.rows(), n = x.cols();
    double e = 0.0;
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < n; ++c) {
            const double v = x(r, c) - x((r + m - 1) % m, c);
            e += v * v;
            if (c != 0 && c != step_col) {
                const double h = x(r, c) - x(r, c - 1);
                e += h * h;
            }
        }
    return e;
}

/// Mean jump across the step column.
inline double step_height(const ehs::Image& x, std::size_t step_col) {
    double s = 0.0;
    for (std::size_t r = 0; r < x.rows(); ++r) s += x(r, step_col) - x(r, step_col - 1);
    return s / double(x.rows());
}

/// Two-sided page: background 250, ink strokes 20, bleed-through strokes with
/// a 180 core and a one-pixel 215 fringe (show-through is diffused through the
/// sheet, so it has no hard edge).
struct Page {
    ehs::Image image;
    std::vector<std::size_t> ink;         // pixel indices of ink
    std::vector<std::size_t> bleed_core;  // pixel indices of the 180 core
    std::vector<std::size_t> bleed_all;   // core and fringe
};

inline Page scanned_page(std::size_t rows, std::size_t cols) {
    constexpr double background = 250.0, ink = 20.0, bleed = 180.0, fringe = 215.0;
    ehs::Image img(rows, cols, background);
    std::vector<int> label(rows * cols, 0);  // 1 ink, 2 bleed core, 3 fringe

    // "Text lines": ink bars in the upper-left part of each line band,
    // bleed bars (mirrored text from the verso) offset between them.
    const std::size_t margin = rows / 8;
    for (std::size_t band = margin; band + 12 < rows - margin; band += 24) {
        for (std::size_t c0 = margin; c0 + 10 < cols - margin; c0 += 16) {
            for (std::size_t r = band; r < band + 6; ++r)
                for (std::size_t c = c0; c < c0 + 8; ++c) label[r * cols + c] = 1;
            const std::size_t br = band + 12, bc = c0 + 4;
            for (std::size_t r = br - 1; r < br + 5; ++r)
                for (std::size_t c = bc - 1; c < bc + 9 && c < cols; ++c)
                    if (label[r * cols + c] == 0) label[r * cols + c] = (r == br - 1 || r == br + 4 || c == bc - 1 || c == bc + 8) ? 3 : 2;
        }
    }
    Page page;
    for (std::size_t i = 0; i < rows * cols; ++i) {
        switch (label[i]) {
            case 1: img[i] = ink; page.ink.push_back(i); break;
            case 2: img[i] = bleed; page.bleed_core.push_back(i); page.bleed_all.push_back(i); break;
            case 3: img[i] = fringe; page.bleed_all.push_back(i); break;
            default: break;
        }
    }
    page.image = std::move(img);
    return page;
}

inline double mean_over(const ehs::Image& x, const std::vector<std::size_t>& idx) {
    double s = 0.0;
    for (std::size_t i : idx) s += x[i];
    return s / double(idx.size());
}

/// Checkerboard of 40/160 with +-20 integer jitter: every window of side >= 2
/// has a population std far above 3.
inline ehs::Image checker_noise(std::size_t rows, std::size_t cols, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_int_distribution<int> jitter(-20, 20);
    ehs::Image img(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) img(r, c) = ((r + c) % 2 ? 160.0 : 40.0) + jitter(rng);
    return img;
}

struct PatchScene {
    ehs::Image image;
    std::size_t row0, col0, side;
    double value;
};

/// 128 x 128 checker noise with one flat 64 x 64 patch of 240 placed off the
/// 64-window stride grid.
inline PatchScene flat_patch(unsigned seed) {
    PatchScene s{checker_noise(128, 128, seed), 30, 45, 64, 240.0};
    for (std::size_t r = s.row0; r < s.row0 + s.side; ++r)
        for (std::size_t c = s.col0; c < s.col0 + s.side; ++c) s.image(r, c) = s.value;
    return s;
}

inline ehs::Image random_integer_image(std::size_t rows, std::size_t cols, std::mt19937& rng, int lo = 0,
                                       int hi = 255) {
    std::uniform_int_distribution<int> u(lo, hi);
    ehs::Image img(rows, cols);
    for (double& v : img.data()) v = u(rng);
    return img;
}

}  // namespace synth
