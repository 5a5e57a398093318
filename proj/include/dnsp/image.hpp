#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"

namespace dnsp {

/// Dense row-major matrix of doubles. Used for images, gradients and
/// (through Kernel2D) for filter coefficients.
class Image {
  public:
    Image() = default;

    Image(std::size_t height, std::size_t width, double fill = 0.0)
        : height_(height), width_(width), data_(height * width, fill) {
        if (height == 0 || width == 0)
            throw DimensionError("Image: dimensions must be positive");
    }

    Image(std::size_t height, std::size_t width, std::vector<double> data)
        : height_(height), width_(width), data_(std::move(data)) {
        if (height == 0 || width == 0)
            throw DimensionError("Image: dimensions must be positive");
        if (data_.size() != height * width)
            throw DimensionError("Image: data length does not match height*width");
    }

    /// Build from nested rows, e.g. `Image::from_rows({{1, 2}, {3, 4}})`.
    static Image from_rows(std::initializer_list<std::initializer_list<double>> rows) {
        const std::size_t h = rows.size();
        const std::size_t w = h ? rows.begin()->size() : 0;
        std::vector<double> data;
        data.reserve(h * w);
        for (const auto& row : rows) {
            if (row.size() != w)
                throw DimensionError("Image::from_rows: ragged rows");
            data.insert(data.end(), row.begin(), row.end());
        }
        return Image(h, w, std::move(data));
    }

    std::size_t height() const noexcept { return height_; }
    std::size_t width() const noexcept { return width_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * width_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * width_ + c]; }

    std::span<double> values() noexcept { return data_; }
    std::span<const double> values() const noexcept { return data_; }
    double* row(std::size_t r) noexcept { return data_.data() + r * width_; }
    const double* row(std::size_t r) const noexcept { return data_.data() + r * width_; }

    bool same_shape(const Image& other) const noexcept {
        return height_ == other.height_ && width_ == other.width_;
    }

    friend bool operator==(const Image&, const Image&) = default;

  private:
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::vector<double> data_;
};

/// Convolution kernel with odd height and width; the center tap sits at
/// (height/2, width/2).
class Kernel2D {
  public:
    Kernel2D() : Kernel2D(1, 1) {}

    Kernel2D(std::size_t height, std::size_t width, double fill = 0.0)
        : coeffs_(check_odd(height), check_odd(width), fill) {}

    explicit Kernel2D(Image coeffs) : coeffs_(std::move(coeffs)) {
        check_odd(coeffs_.height());
        check_odd(coeffs_.width());
    }

    static Kernel2D from_rows(std::initializer_list<std::initializer_list<double>> rows) {
        return Kernel2D(Image::from_rows(rows));
    }

    std::size_t height() const noexcept { return coeffs_.height(); }
    std::size_t width() const noexcept { return coeffs_.width(); }
    std::size_t size() const noexcept { return coeffs_.size(); }

    double& operator()(std::size_t r, std::size_t c) noexcept { return coeffs_(r, c); }
    double operator()(std::size_t r, std::size_t c) const noexcept { return coeffs_(r, c); }

    std::span<double> values() noexcept { return coeffs_.values(); }
    std::span<const double> values() const noexcept { return coeffs_.values(); }
    const Image& as_image() const noexcept { return coeffs_; }

    friend bool operator==(const Kernel2D&, const Kernel2D&) = default;

  private:
    static std::size_t check_odd(std::size_t n) {
        if (n == 0 || n % 2 == 0)
            throw DimensionError("Kernel2D: dimensions must be odd and positive");
        return n;
    }

    Image coeffs_;
};

/// Boundary rule used by "same" convolutions.
enum class PaddingMode { Zero, Replicate };

inline const char* to_string(PaddingMode mode) {
    return mode == PaddingMode::Zero ? "zero" : "replicate";
}

inline PaddingMode padding_from_string(const std::string& s) {
    if (s == "zero") return PaddingMode::Zero;
    if (s == "replicate") return PaddingMode::Replicate;
    throw ArgumentError("unknown padding mode '" + s + "'");
}

/// Frobenius inner product.
inline double inner(const Image& a, const Image& b) {
    if (!a.same_shape(b))
        throw DimensionError("inner: shape mismatch");
    double acc = 0.0;
    const auto av = a.values();
    const auto bv = b.values();
    for (std::size_t i = 0; i < av.size(); ++i) acc += av[i] * bv[i];
    return acc;
}

inline double frobenius_sq(const Image& a) { return inner(a, a); }

inline double mean(const Image& a) {
    double acc = 0.0;
    for (double v : a.values()) acc += v;
    return acc / static_cast<double>(a.size());
}

inline bool all_finite(std::span<const double> values) {
    return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

inline Image clamp01(Image img) {
    for (double& v : img.values()) v = std::clamp(v, 0.0, 1.0);
    return img;
}

/// Copy of the rectangle starting at (row, col).
inline Image crop(const Image& img, std::size_t row, std::size_t col, std::size_t height,
                  std::size_t width) {
    if (row + height > img.height() || col + width > img.width())
        throw DimensionError("crop: window exceeds image");
    Image out(height, width);
    for (std::size_t r = 0; r < height; ++r)
        std::copy_n(img.row(row + r) + col, width, out.row(r));
    return out;
}

/// Largest top-left crop whose dimensions are multiples of `factor`.
inline Image crop_to_multiple(const Image& img, std::size_t factor) {
    if (factor == 0) throw ArgumentError("crop_to_multiple: factor must be positive");
    const std::size_t h = img.height() / factor * factor;
    const std::size_t w = img.width() / factor * factor;
    if (h == 0 || w == 0) throw DimensionError("crop_to_multiple: image smaller than factor");
    return crop(img, 0, 0, h, w);
}

} // namespace dnsp
