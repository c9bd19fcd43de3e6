#pragma once

// Outer iteration and the four applications built on it.
//
//   X0 = gaussian(I, sigma)
//   X_k = argmin ||G x - threshold(G X_{k-1}, lambda)||_p^p + indicator_C(x),  k = 1..outer_iters
//
// Colour images are processed channel by channel.

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ehs/background.hpp"
#include "ehs/constraints.hpp"
#include "ehs/edge_hist.hpp"
#include "ehs/gradients.hpp"
#include "ehs/image.hpp"
#include "ehs/solvers.hpp"

namespace ehs {

struct PipelineConfig {
    double lambda = 15.0;
    double sigma = 0.0;
    std::size_t outer_iters = 3;
    SolverConfig solver{};
    /// Exaggeration factor in J = X + s (I - X).
    double s = 2.0;
    BackgroundParams background{};
    /// Skips background detection in descan when set.
    std::optional<double> alpha;
    /// Start each solve from the previous outer iterate instead of the raw input.
    bool warm_start = true;

    int p() const noexcept { return solver.p; }

    void validate() const {
        if (!(lambda >= 0.0)) throw std::invalid_argument("PipelineConfig: lambda must be nonnegative");
        if (!(sigma >= 0.0)) throw std::invalid_argument("PipelineConfig: sigma must be nonnegative");
        if (outer_iters == 0) throw std::invalid_argument("PipelineConfig: outer_iters must be at least 1");
        if (!(s > 0.0)) throw std::invalid_argument("PipelineConfig: s must be positive");
        solver.validate();
        background.validate();
    }
};

struct SolveRecord {
    std::size_t channel = 0;
    std::size_t outer = 0;
    SolveResult result;  // image dropped, traces kept
};

/// Optional diagnostics filled in by the pipeline entry points.
struct RunLog {
    std::vector<SolveRecord> solves;
    std::optional<BackgroundResult> background;
    std::size_t pinned_pixels = 0;
};

namespace detail {

inline Image outer_loop(const Image& input, const Image& x0, const ConstraintSet& c, const PipelineConfig& cfg,
                        RunLog* log, std::size_t channel) {
    Image x = x0;
    for (std::size_t k = 1; k <= cfg.outer_iters; ++k) {
        const GradientField d = threshold_field(grad(x), cfg.lambda);
        SolveResult r = solve(d, c, cfg.warm_start ? x : input, cfg.solver);
        x = std::move(r.x);
        if (log) {
            r.x = Image();
            log->solves.push_back({channel, k, std::move(r)});
        }
    }
    return x;
}

template <class Fn>
ColorImage per_channel(const ColorImage& img, Fn&& fn) {
    std::array<Image, 3> out;
    for (std::size_t k = 0; k < 3; ++k) out[k] = fn(img.channel(k), k);
    return merge(std::move(out));
}

inline Image exaggerate_from(const Image& input, const Image& base, double s) {
    // s I + (1 - s) X is J = X + s (I - X), and exact for s = 1.
    Image j(input.rows(), input.cols());
    for (std::size_t i = 0; i < j.size(); ++i) j[i] = s * input[i] + (1.0 - s) * base[i];
    return clamp(j, kIntensityMin, kIntensityMax);
}

inline Image edge_map_from(const Image& smoothed, double edge_threshold) {
    const GradientField g = grad(smoothed);
    Image out(smoothed.rows(), smoothed.cols());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = std::sqrt(g.h[i] * g.h[i] + g.v[i] * g.v[i]) >= edge_threshold ? kIntensityMax : 0.0;
    return out;
}

inline Image smooth_channel(const Image& img, const PipelineConfig& cfg, RunLog* log, std::size_t channel) {
    const Image x0 = gaussian_smooth(img, cfg.sigma);
    return outer_loop(img, x0, make_box(), cfg, log, channel);
}

}  // namespace detail

/// Edge-preserving smoothing (image abstraction) under the box constraint.
inline Image smooth(const Image& img, const PipelineConfig& cfg, RunLog* log = nullptr) {
    cfg.validate();
    return detail::smooth_channel(img, cfg, log, 0);
}

inline ColorImage smooth_color(const ColorImage& img, const PipelineConfig& cfg, RunLog* log = nullptr) {
    cfg.validate();
    return detail::per_channel(img, [&](const Image& ch, std::size_t k) { return detail::smooth_channel(ch, cfg, log, k); });
}

/// J = X + s (I - X) with X = smooth(I), clamped to [0,255].
inline Image exaggerate(const Image& img, const PipelineConfig& cfg, RunLog* log = nullptr) {
    return detail::exaggerate_from(img, smooth(img, cfg, log), cfg.s);
}

inline ColorImage exaggerate_color(const ColorImage& img, const PipelineConfig& cfg, RunLog* log = nullptr) {
    const ColorImage base = smooth_color(img, cfg, log);
    return detail::per_channel(img, [&](const Image& ch, std::size_t k) {
        return detail::exaggerate_from(ch, base.channel(k), cfg.s);
    });
}

/// 255 where the gradient magnitude of the smoothed image is >= edge_threshold, else 0.
inline Image edge_map(const Image& img, const PipelineConfig& cfg, double edge_threshold, RunLog* log = nullptr) {
    if (!(edge_threshold >= 0.0)) throw std::invalid_argument("edge_map: edge_threshold must be nonnegative");
    return detail::edge_map_from(smooth(img, cfg, log), edge_threshold);
}

/// Colour input: channels are smoothed separately, edges taken on their mean.
inline Image edge_map(const ColorImage& img, const PipelineConfig& cfg, double edge_threshold, RunLog* log = nullptr) {
    if (!(edge_threshold >= 0.0)) throw std::invalid_argument("edge_map: edge_threshold must be nonnegative");
    return detail::edge_map_from(to_gray(smooth_color(img, cfg, log)), edge_threshold);
}

template <class Img>
struct DescanResult {
    Img image;
    BackgroundResult background;
};

namespace detail {

inline BackgroundResult resolve_alpha(const Image& gray_x0, const PipelineConfig& cfg) {
    if (cfg.alpha) {
        BackgroundResult r;
        r.alpha = *cfg.alpha;
        return r;
    }
    return detect_background(gray_x0, cfg.background);
}

}  // namespace detail

/// Scan-through removal: background pixels (X0 >= alpha) are pinned to X0,
/// the rest is solved under the box constraint.
inline DescanResult<Image> descan(const Image& img, const PipelineConfig& cfg, RunLog* log = nullptr) {
    cfg.validate();
    const Image x0 = gaussian_smooth(img, cfg.sigma);
    const BackgroundResult bg = detail::resolve_alpha(x0, cfg);
    const ConstraintSet c = make_scan(x0, bg.alpha);
    if (log) {
        log->background = bg;
        log->pinned_pixels += c.pinned_count();
    }
    return {detail::outer_loop(img, x0, c, cfg, log, 0), bg};
}

/// Colour pages: alpha comes from the channel mean, pins are per channel.
inline DescanResult<ColorImage> descan(const ColorImage& img, const PipelineConfig& cfg, RunLog* log = nullptr) {
    cfg.validate();
    std::array<Image, 3> x0;
    for (std::size_t k = 0; k < 3; ++k) x0[k] = gaussian_smooth(img.channel(k), cfg.sigma);
    const BackgroundResult bg = detail::resolve_alpha(to_gray(merge(x0)), cfg);
    if (log) log->background = bg;
    ColorImage out = detail::per_channel(img, [&](const Image& ch, std::size_t k) {
        const ConstraintSet c = make_scan(x0[k], bg.alpha);
        if (log) log->pinned_pixels += c.pinned_count();
        return detail::outer_loop(ch, x0[k], c, cfg, log, k);
    });
    return {std::move(out), bg};
}

}  // namespace ehs
