#pragma once

// Exact solves of (G^T G + shift I) x = b on the periodic grid.
//
// G^T G is circulant, so a forward real DFT, a pointwise division by
// (eigenvalue + shift) and an inverse DFT solve the system in O(mn log mn).

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace ehs {

namespace detail {

// The FFTW planner is not re-entrant; execution on distinct plans is.
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwFree {
    void operator()(void* p) const noexcept { fftw_free(p); }
};

struct FftwPlanDestroy {
    void operator()(fftw_plan p) const noexcept {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(p);
    }
};

using FftwPlan = std::unique_ptr<std::remove_pointer_t<fftw_plan>, FftwPlanDestroy>;

}  // namespace detail

class PeriodicGramSolver {
public:
    /// shift must be positive: G^T G alone is singular on constants.
    PeriodicGramSolver(std::size_t rows, std::size_t cols, double shift)
        : rows_(rows), cols_(cols), half_cols_(cols / 2 + 1) {
        if (rows == 0 || cols == 0) throw std::invalid_argument("PeriodicGramSolver: dimensions must be positive");
        if (!(shift > 0.0)) throw std::invalid_argument("PeriodicGramSolver: shift must be positive");

        real_.reset(static_cast<double*>(fftw_malloc(sizeof(double) * rows * cols)));
        spec_.reset(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * rows * half_cols_)));
        if (!real_ || !spec_) throw std::bad_alloc();
        {
            std::lock_guard lock(detail::fftw_planner_mutex());
            const int m = static_cast<int>(rows), n = static_cast<int>(cols);
            // FFTW_ESTIMATE never times candidate plans, so the same shape
            // always yields the same plan and bit-identical results.
            forward_.reset(fftw_plan_dft_r2c_2d(m, n, real_.get(), spec_.get(), FFTW_ESTIMATE));
            backward_.reset(fftw_plan_dft_c2r_2d(m, n, spec_.get(), real_.get(), FFTW_ESTIMATE));
        }
        if (!forward_ || !backward_) throw std::runtime_error("PeriodicGramSolver: FFTW planning failed");

        // Inverse of (eigenvalue + shift), with the 1/(mn) normalisation of
        // FFTW's unnormalised inverse folded in.
        const double scale = 1.0 / static_cast<double>(rows * cols);
        inv_symbol_.resize(rows * half_cols_);
        for (std::size_t a = 0; a < rows; ++a) {
            const double sa = std::sin(std::numbers::pi * double(a) / double(rows));
            for (std::size_t b = 0; b < half_cols_; ++b) {
                const double sb = std::sin(std::numbers::pi * double(b) / double(cols));
                inv_symbol_[a * half_cols_ + b] = scale / (4.0 * sa * sa + 4.0 * sb * sb + shift);
            }
        }
    }

    PeriodicGramSolver(const PeriodicGramSolver&) = delete;
    PeriodicGramSolver& operator=(const PeriodicGramSolver&) = delete;
    PeriodicGramSolver(PeriodicGramSolver&&) noexcept = default;
    PeriodicGramSolver& operator=(PeriodicGramSolver&&) noexcept = default;

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    /// x = (G^T G + shift I)^{-1} rhs. rhs and x may alias.
    void solve(std::span<const double> rhs, std::span<double> x) {
        const std::size_t n = rows_ * cols_;
        if (rhs.size() != n || x.size() != n) throw std::invalid_argument("PeriodicGramSolver::solve: size mismatch");
        std::copy(rhs.begin(), rhs.end(), real_.get());
        fftw_execute(forward_.get());
        fftw_complex* spec = spec_.get();
        for (std::size_t i = 0; i < rows_ * half_cols_; ++i) {
            spec[i][0] *= inv_symbol_[i];
            spec[i][1] *= inv_symbol_[i];
        }
        fftw_execute(backward_.get());
        std::copy(real_.get(), real_.get() + n, x.begin());
    }

private:
    std::size_t rows_, cols_, half_cols_;
    std::unique_ptr<double, detail::FftwFree> real_;
    std::unique_ptr<fftw_complex, detail::FftwFree> spec_;
    detail::FftwPlan forward_;
    detail::FftwPlan backward_;
    std::vector<double> inv_symbol_;
};

}  // namespace ehs
