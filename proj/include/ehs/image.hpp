#pragma once

// Real-valued raster types on the 8-bit intensity scale [0,255].

#include <algorithm>
#include <array>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace ehs {

inline constexpr double kIntensityMin = 0.0;
inline constexpr double kIntensityMax = 255.0;

/// Single-channel image, row-major, double precision.
class Image {
public:
    Image() = default;

    Image(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {
        if (rows == 0 || cols == 0) throw std::invalid_argument("Image: dimensions must be positive");
    }

    Image(std::size_t rows, std::size_t cols, std::vector<double> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (rows == 0 || cols == 0) throw std::invalid_argument("Image: dimensions must be positive");
        if (data_.size() != rows * cols) throw std::invalid_argument("Image: data length does not match rows*cols");
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }
    const std::vector<double>& values() const noexcept { return data_; }

    bool same_shape(const Image& other) const noexcept {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    friend bool operator==(const Image&, const Image&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Three channels (R, G, B) of identical dimensions.
class ColorImage {
public:
    ColorImage() = default;

    ColorImage(Image r, Image g, Image b) : channels_{std::move(r), std::move(g), std::move(b)} {
        if (!channels_[0].same_shape(channels_[1]) || !channels_[0].same_shape(channels_[2]))
            throw std::invalid_argument("ColorImage: channel dimensions differ");
    }

    std::size_t rows() const noexcept { return channels_[0].rows(); }
    std::size_t cols() const noexcept { return channels_[0].cols(); }

    const Image& channel(std::size_t k) const { return channels_.at(k); }
    const std::array<Image, 3>& channels() const noexcept { return channels_; }

    friend bool operator==(const ColorImage&, const ColorImage&) = default;

private:
    std::array<Image, 3> channels_;
};

inline std::array<Image, 3> split(const ColorImage& img) { return img.channels(); }

inline ColorImage merge(std::array<Image, 3> channels) {
    return ColorImage(std::move(channels[0]), std::move(channels[1]), std::move(channels[2]));
}

/// Elementwise min(max(v, lo), hi).
inline Image clamp(const Image& img, double lo, double hi) {
    if (!(lo <= hi)) throw std::invalid_argument("clamp: lo must not exceed hi");
    Image out = img;
    for (double& v : out.data()) v = std::clamp(v, lo, hi);
    return out;
}

inline bool in_range(std::span<const double> values, double lo = kIntensityMin, double hi = kIntensityMax) {
    return std::all_of(values.begin(), values.end(), [=](double v) { return v >= lo && v <= hi; });
}

/// Channel mean, used where a colour page needs a single intensity plane.
inline Image to_gray(const ColorImage& img) {
    Image out(img.rows(), img.cols());
    const auto& ch = img.channels();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (ch[0][i] + ch[1][i] + ch[2][i]) / 3.0;
    return out;
}

}  // namespace ehs
