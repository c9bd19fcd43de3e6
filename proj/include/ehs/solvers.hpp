#pragma once

// Minimizers of  ||G x - d||_p^p + indicator_C(x)  for p = 2 (FISTA) and
// p = 1 (ADMM).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ehs/constraints.hpp"
#include "ehs/fourier.hpp"
#include "ehs/gradients.hpp"
#include "ehs/image.hpp"

namespace ehs {

class NonFiniteError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SolverConfig {
    int p = 2;
    std::size_t max_iter = 500;
    /// FISTA: relative objective change over 5 iterations.
    /// ADMM: primal residual threshold, scaled by sqrt(mn) * 255.
    double tol = 1e-4;
    double rho = 1.0;
    /// Lipschitz constant of the p = 2 smooth part, 2 ||G||^2 <= 16.
    double lipschitz = 16.0;

    void validate() const {
        if (p != 1 && p != 2) throw std::invalid_argument("SolverConfig: p must be 1 or 2");
        if (max_iter == 0) throw std::invalid_argument("SolverConfig: max_iter must be positive");
        if (!(tol > 0.0)) throw std::invalid_argument("SolverConfig: tol must be positive");
        if (!(rho > 0.0)) throw std::invalid_argument("SolverConfig: rho must be positive");
        if (!(lipschitz > 0.0)) throw std::invalid_argument("SolverConfig: lipschitz must be positive");
    }
};

struct SolveResult {
    Image x;
    std::vector<double> objective_trace;
    /// ADMM only: ||G x - y||_2 and ||x - z||_2 per iteration.
    std::vector<double> residual_y_trace;
    std::vector<double> residual_z_trace;
    /// ADMM only: rho ||G^T (y - y_prev) + (z - z_prev)||_2 per iteration.
    std::vector<double> dual_residual_trace;
    std::size_t iterations_run = 0;
    bool converged = false;

    double final_objective() const {
        return objective_trace.empty() ? std::numeric_limits<double>::quiet_NaN() : objective_trace.back();
    }
};

namespace detail {

inline double residual_norm_p(std::span<const double> gh, std::span<const double> gv, const GradientField& d,
                              int p) {
    double s = 0.0;
    for (std::size_t i = 0; i < gh.size(); ++i) {
        const double a = gh[i] - d.h[i], b = gv[i] - d.v[i];
        s += p == 1 ? std::abs(a) + std::abs(b) : a * a + b * b;
    }
    return s;
}

inline void require_finite(std::span<const double> values, const char* what) {
    for (double v : values)
        if (!std::isfinite(v)) throw NonFiniteError(std::string("non-finite value in ") + what);
}

inline void check_problem(const GradientField& d, const Image& x_init, const char* who) {
    check_same_shape(d, x_init.rows(), x_init.cols(), who);
    require_finite(d.h, "d");
    require_finite(d.v, "d");
    require_finite(x_init.data(), "initial image");
}

inline double shrink(double v, double t) {
    if (v > t) return v - t;
    if (v < -t) return v + t;
    return 0.0;
}

}  // namespace detail

/// sum_j |(G x)_j - d_j|^p
inline double objective(const Image& x, const GradientField& d, int p) {
    if (p != 1 && p != 2) throw std::invalid_argument("objective: p must be 1 or 2");
    check_same_shape(d, x.rows(), x.cols(), "objective");
    GradientField gx = grad(x);
    return detail::residual_norm_p(gx.h, gx.v, d, p);
}

/// FISTA for p = 2: gradient step on ||Gx - d||^2 with step 1/L, projection
/// onto C, Nesterov momentum. Returns the best iterate seen, which lies in C.
inline SolveResult solve_p2_fista(const GradientField& d, const ConstraintSet& c, const Image& x_init,
                                  const SolverConfig& cfg) {
    cfg.validate();
    detail::check_problem(d, x_init, "solve_p2_fista");
    const std::size_t m = x_init.rows(), n = x_init.cols(), mn = m * n;
    constexpr std::size_t window = 5;

    Image x = c.project(x_init);
    Image x_prev = x;
    Image y = x;
    Image best = x;
    std::vector<double> rh(mn), rv(mn), step(mn);
    double t = 1.0;
    double best_obj = objective(x, d, 2);

    SolveResult res;
    res.objective_trace.reserve(cfg.max_iter);
    const double inv_l = 1.0 / cfg.lipschitz;

    for (std::size_t k = 0; k < cfg.max_iter; ++k) {
        // step = 2 G^T (G y - d)
        apply_grad(y.data(), m, n, rh, rv);
        for (std::size_t i = 0; i < mn; ++i) {
            rh[i] -= d.h[i];
            rv[i] -= d.v[i];
        }
        apply_grad_adjoint(rh, rv, m, n, step);

        std::swap(x_prev, x);
        for (std::size_t i = 0; i < mn; ++i) x[i] = y[i] - 2.0 * inv_l * step[i];
        c.project_inplace(x.data());

        apply_grad(x.data(), m, n, rh, rv);
        const double f = detail::residual_norm_p(rh, rv, d, 2);
        if (!std::isfinite(f)) throw NonFiniteError("solve_p2_fista: objective became non-finite");
        res.objective_trace.push_back(f);
        if (f < best_obj) {
            best_obj = f;
            best = x;
        }

        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        const double beta = (t - 1.0) / t_next;
        for (std::size_t i = 0; i < mn; ++i) y[i] = x[i] + beta * (x[i] - x_prev[i]);
        t = t_next;

        const auto& tr = res.objective_trace;
        if (tr.size() > window) {
            const double before = tr[tr.size() - 1 - window];
            if (std::abs(before - f) <= cfg.tol * before) {
                res.converged = true;
                break;
            }
        }
    }
    res.iterations_run = res.objective_trace.size();
    res.x = std::move(best);
    return res;
}

/// ADMM for p = 1 on  min ||y - d||_1 + indicator_C(z)  s.t.  G x = y, x = z.
/// The x-update is an exact periodic Fourier solve, y is a shifted
/// soft-threshold, z a projection onto C. The reported image is P_C(x).
inline SolveResult solve_p1_admm(const GradientField& d, const ConstraintSet& c, const Image& x_init,
                                 const GradientField& y_init, const SolverConfig& cfg) {
    cfg.validate();
    detail::check_problem(d, x_init, "solve_p1_admm");
    check_same_shape(y_init, x_init.rows(), x_init.cols(), "solve_p1_admm");
    detail::require_finite(y_init.h, "y_init");
    detail::require_finite(y_init.v, "y_init");
    const std::size_t m = x_init.rows(), n = x_init.cols(), mn = m * n;

    PeriodicGramSolver gram(m, n, 1.0);
    std::vector<double> x(x_init.data().begin(), x_init.data().end());
    std::vector<double> z = c.project(x_init.data());
    std::vector<double> yh = y_init.h, yv = y_init.v;
    std::vector<double> uh(mn, 0.0), uv(mn, 0.0), uz(mn, 0.0);
    std::vector<double> gh(mn), gv(mn), bh(mn), bv(mn), rhs(mn), xp(mn);
    std::vector<double> yh_prev(mn), yv_prev(mn), z_prev(mn), dual(mn);

    const double threshold = 1.0 / cfg.rho;
    const double stop = cfg.tol * std::sqrt(static_cast<double>(mn)) * kIntensityMax;

    SolveResult res;
    res.objective_trace.reserve(cfg.max_iter);

    for (std::size_t k = 0; k < cfg.max_iter; ++k) {
        // x: (G^T G + I) x = G^T (y - u_y) + (z - u_z)
        for (std::size_t i = 0; i < mn; ++i) {
            bh[i] = yh[i] - uh[i];
            bv[i] = yv[i] - uv[i];
        }
        apply_grad_adjoint(bh, bv, m, n, rhs);
        for (std::size_t i = 0; i < mn; ++i) rhs[i] += z[i] - uz[i];
        gram.solve(rhs, x);

        yh_prev = yh;
        yv_prev = yv;
        z_prev = z;

        // y = d + shrink(G x + u_y - d, 1/rho)
        apply_grad(x, m, n, gh, gv);
        for (std::size_t i = 0; i < mn; ++i) {
            yh[i] = d.h[i] + detail::shrink(gh[i] + uh[i] - d.h[i], threshold);
            yv[i] = d.v[i] + detail::shrink(gv[i] + uv[i] - d.v[i], threshold);
        }

        // z = P_C(x + u_z)
        for (std::size_t i = 0; i < mn; ++i) z[i] = x[i] + uz[i];
        c.project_inplace(z);

        double ry = 0.0, rz = 0.0;
        for (std::size_t i = 0; i < mn; ++i) {
            const double a = gh[i] - yh[i], b = gv[i] - yv[i], e = x[i] - z[i];
            uh[i] += a;
            uv[i] += b;
            uz[i] += e;
            ry += a * a + b * b;
            rz += e * e;
        }
        ry = std::sqrt(ry);
        rz = std::sqrt(rz);

        // Dual residual rho * (G^T (y - y_prev) + (z - z_prev)).
        for (std::size_t i = 0; i < mn; ++i) {
            bh[i] = yh[i] - yh_prev[i];
            bv[i] = yv[i] - yv_prev[i];
        }
        apply_grad_adjoint(bh, bv, m, n, dual);
        double rd = 0.0;
        for (std::size_t i = 0; i < mn; ++i) {
            const double e = cfg.rho * (dual[i] + z[i] - z_prev[i]);
            rd += e * e;
        }
        rd = std::sqrt(rd);

        std::copy(x.begin(), x.end(), xp.begin());
        c.project_inplace(xp);
        apply_grad(xp, m, n, gh, gv);
        const double f = detail::residual_norm_p(gh, gv, d, 1);
        if (!std::isfinite(f) || !std::isfinite(ry) || !std::isfinite(rz))
            throw NonFiniteError("solve_p1_admm: iterate became non-finite");
        res.objective_trace.push_back(f);
        res.residual_y_trace.push_back(ry);
        res.residual_z_trace.push_back(rz);
        res.dual_residual_trace.push_back(rd);

        if (ry < stop && rz < stop && rd < stop) {
            res.converged = true;
            break;
        }
    }
    res.iterations_run = res.objective_trace.size();
    c.project_inplace(x);
    res.x = Image(m, n, std::move(x));
    return res;
}

/// Dispatches on cfg.p; the ADMM path starts from y = d.
inline SolveResult solve(const GradientField& d, const ConstraintSet& c, const Image& x_init,
                         const SolverConfig& cfg) {
    if (cfg.p == 1) return solve_p1_admm(d, c, x_init, d, cfg);
    return solve_p2_fista(d, c, x_init, cfg);
}

inline void write_trace_csv(std::ostream& os, const SolveResult& r) {
    os << "iteration,objective,residual_y,residual_z,dual_residual\n";
    const auto old_prec = os.precision(17);
    for (std::size_t k = 0; k < r.objective_trace.size(); ++k) {
        os << k + 1 << ',' << r.objective_trace[k] << ',';
        if (k < r.residual_y_trace.size()) os << r.residual_y_trace[k];
        os << ',';
        if (k < r.residual_z_trace.size()) os << r.residual_z_trace[k];
        os << ',';
        if (k < r.dual_residual_trace.size()) os << r.dual_residual_trace[k];
        os << '\n';
    }
    os.precision(old_prec);
}

}  // namespace ehs
