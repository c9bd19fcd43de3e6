#pragma once

// Feasible sets for the solvers: the dynamic-range box [0,255], optionally
// with background pixels pinned to their reference values.

#include <algorithm>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "ehs/image.hpp"

namespace ehs {

class ConstraintSet {
public:
    /// Box [0,255], nothing pinned.
    static ConstraintSet box() { return ConstraintSet{}; }

    /// Box plus pinning: every pixel with reference value >= alpha keeps that value.
    static ConstraintSet scan(const Image& reference, double alpha) {
        if (!in_range(reference.data()))
            throw std::invalid_argument("ConstraintSet::scan: reference values must lie in [0,255]");
        ConstraintSet c;
        c.alpha_ = alpha;
        c.size_ = reference.size();
        c.pinned_mask_.assign(reference.size(), 0);
        c.pinned_value_.assign(reference.size(), 0.0);
        for (std::size_t i = 0; i < reference.size(); ++i) {
            if (reference[i] >= alpha) {
                c.pinned_mask_[i] = 1;
                c.pinned_value_[i] = reference[i];
                ++c.pinned_count_;
            }
        }
        return c;
    }

    double lo() const noexcept { return lo_; }
    double hi() const noexcept { return hi_; }
    std::optional<double> alpha() const noexcept { return alpha_; }
    std::size_t pinned_count() const noexcept { return pinned_count_; }

    bool is_pinned(std::size_t i) const noexcept { return !pinned_mask_.empty() && pinned_mask_[i]; }
    double pinned_value(std::size_t i) const { return pinned_value_.at(i); }

    /// Euclidean projection, in place.
    void project_inplace(std::span<double> x) const {
        check_length(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = is_pinned(i) ? pinned_value_[i] : std::clamp(x[i], lo_, hi_);
    }

    std::vector<double> project(std::span<const double> x) const {
        std::vector<double> out(x.begin(), x.end());
        project_inplace(out);
        return out;
    }

    Image project(const Image& x) const {
        Image out = x;
        project_inplace(out.data());
        return out;
    }

    bool contains(std::span<const double> x) const {
        check_length(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (is_pinned(i) ? x[i] != pinned_value_[i] : !(x[i] >= lo_ && x[i] <= hi_)) return false;
        }
        return true;
    }

private:
    ConstraintSet() = default;

    void check_length(std::size_t n) const {
        if (size_ != 0 && n != size_) throw std::invalid_argument("ConstraintSet: length mismatch");
    }

    double lo_ = kIntensityMin;
    double hi_ = kIntensityMax;
    std::optional<double> alpha_;
    std::size_t size_ = 0;  // 0: no pinning, any length accepted
    std::size_t pinned_count_ = 0;
    std::vector<unsigned char> pinned_mask_;
    std::vector<double> pinned_value_;
};

inline ConstraintSet make_box() { return ConstraintSet::box(); }

inline ConstraintSet make_scan(const Image& x0, double alpha) { return ConstraintSet::scan(x0, alpha); }

}  // namespace ehs
