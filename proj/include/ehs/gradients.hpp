#pragma once

// Backward differences on the periodic grid (2-D torus).
//
//   h[r,c] = x[r,c] - x[r, c-1 mod n]
//   v[r,c] = x[r,c] - x[r-1 mod m, c]
//
// The stacked operator G = (G_h; G_v) has adjoint G^T g = -div g with the
// matching periodic forward divergence, and G^T G is the periodic 5-point
// Laplacian, diagonal in the 2-D DFT basis.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "ehs/image.hpp"

namespace ehs {

/// Horizontal and vertical differences, each rows*cols long. Flattened
/// order is all of h followed by all of v.
struct GradientField {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> h;
    std::vector<double> v;

    GradientField() = default;
    GradientField(std::size_t r, std::size_t c) : rows(r), cols(c), h(r * c, 0.0), v(r * c, 0.0) {}

    std::size_t pixels() const noexcept { return rows * cols; }
    /// Length of the stacked vector (2 * rows * cols).
    std::size_t size() const noexcept { return h.size() + v.size(); }

    double& at_flat(std::size_t j) { return j < h.size() ? h[j] : v[j - h.size()]; }
    double at_flat(std::size_t j) const { return j < h.size() ? h[j] : v[j - h.size()]; }

    std::vector<double> flatten() const {
        std::vector<double> out(h);
        out.insert(out.end(), v.begin(), v.end());
        return out;
    }

    friend bool operator==(const GradientField&, const GradientField&) = default;
};

inline void check_same_shape(const GradientField& g, std::size_t rows, std::size_t cols, const char* who) {
    if (g.rows != rows || g.cols != cols || g.h.size() != rows * cols || g.v.size() != rows * cols)
        throw std::invalid_argument(std::string(who) + ": gradient field shape mismatch");
}

/// out = G x for a rows x cols image stored row-major in x.
inline void apply_grad(std::span<const double> x, std::size_t rows, std::size_t cols, std::span<double> h,
                       std::span<double> v) {
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t up = (r == 0 ? rows - 1 : r - 1) * cols;
        const std::size_t row = r * cols;
        h[row] = x[row] - x[row + cols - 1];
        for (std::size_t c = 1; c < cols; ++c) h[row + c] = x[row + c] - x[row + c - 1];
        for (std::size_t c = 0; c < cols; ++c) v[row + c] = x[row + c] - x[up + c];
    }
}

/// out = G^T (h; v).
inline void apply_grad_adjoint(std::span<const double> h, std::span<const double> v, std::size_t rows,
                               std::size_t cols, std::span<double> out) {
    for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t down = (r + 1 == rows ? 0 : r + 1) * cols;
        const std::size_t row = r * cols;
        for (std::size_t c = 0; c + 1 < cols; ++c) out[row + c] = h[row + c] - h[row + c + 1];
        out[row + cols - 1] = h[row + cols - 1] - h[row];
        for (std::size_t c = 0; c < cols; ++c) out[row + c] += v[row + c] - v[down + c];
    }
}

inline GradientField grad(const Image& img) {
    GradientField g(img.rows(), img.cols());
    apply_grad(img.data(), img.rows(), img.cols(), g.h, g.v);
    return g;
}

inline Image grad_adjoint(const GradientField& g) {
    check_same_shape(g, g.rows, g.cols, "grad_adjoint");
    Image out(g.rows, g.cols);
    apply_grad_adjoint(g.h, g.v, g.rows, g.cols, out.data());
    return out;
}

/// Eigenvalues of G^T G, indexed row-major by frequency (w1, w2):
/// 4 sin^2(pi w1 / rows) + 4 sin^2(pi w2 / cols).
inline std::vector<double> gram_eigenvalues(std::size_t rows, std::size_t cols) {
    if (rows == 0 || cols == 0) throw std::invalid_argument("gram_eigenvalues: dimensions must be positive");
    std::vector<double> row_part(rows), col_part(cols);
    for (std::size_t k = 0; k < rows; ++k) {
        const double s = std::sin(std::numbers::pi * static_cast<double>(k) / static_cast<double>(rows));
        row_part[k] = 4.0 * s * s;
    }
    for (std::size_t k = 0; k < cols; ++k) {
        const double s = std::sin(std::numbers::pi * static_cast<double>(k) / static_cast<double>(cols));
        col_part[k] = 4.0 * s * s;
    }
    std::vector<double> eig(rows * cols);
    for (std::size_t a = 0; a < rows; ++a)
        for (std::size_t b = 0; b < cols; ++b) eig[a * cols + b] = row_part[a] + col_part[b];
    return eig;
}

/// Largest eigenvalue of G^T G, i.e. ||G||^2. Never exceeds 8.
inline double gram_max_eigenvalue(std::size_t rows, std::size_t cols) {
    const auto eig = gram_eigenvalues(rows, cols);
    return *std::max_element(eig.begin(), eig.end());
}

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

}  // namespace ehs
