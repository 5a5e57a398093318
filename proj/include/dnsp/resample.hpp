#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "image.hpp"

namespace dnsp {

namespace detail {

inline std::size_t clamp_index(std::ptrdiff_t i, std::size_t n) {
    if (i < 0) return 0;
    if (i >= static_cast<std::ptrdiff_t>(n)) return n - 1;
    return static_cast<std::size_t>(i);
}

/// Applies a 1-D odd-length filter along rows (horizontal == true) or
/// columns, replicating border samples.
inline Image filter_1d(const Image& img, const std::vector<double>& taps, bool horizontal) {
    const auto radius = static_cast<std::ptrdiff_t>(taps.size() / 2);
    Image out(img.height(), img.width());
    for (std::size_t r = 0; r < img.height(); ++r) {
        for (std::size_t c = 0; c < img.width(); ++c) {
            double acc = 0.0;
            for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
                const double w = taps[static_cast<std::size_t>(k + radius)];
                acc += horizontal
                           ? w * img(r, clamp_index(static_cast<std::ptrdiff_t>(c) + k, img.width()))
                           : w * img(clamp_index(static_cast<std::ptrdiff_t>(r) + k, img.height()), c);
            }
            out(r, c) = acc;
        }
    }
    return out;
}

/// Keys cubic convolution kernel with a = -0.5.
inline double keys_cubic(double x) {
    constexpr double a = -0.5;
    x = std::abs(x);
    if (x <= 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
    if (x < 2.0) return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
    return 0.0;
}

struct CubicTaps {
    std::array<std::size_t, 4> index;
    std::array<double, 4> weight;
};

/// Interpolation taps for every output sample along one axis. Output sample
/// d sits at source coordinate d / scale, i.e. on the same lattice that
/// `downsample` decimates from.
inline std::vector<CubicTaps> cubic_taps(std::size_t in_len, std::size_t out_len, double scale) {
    std::vector<CubicTaps> taps(out_len);
    for (std::size_t d = 0; d < out_len; ++d) {
        const double x = static_cast<double>(d) / scale;
        const double base = std::floor(x);
        const double t = x - base;
        const auto b = static_cast<std::ptrdiff_t>(base);
        for (std::ptrdiff_t k = 0; k < 4; ++k) {
            taps[d].index[static_cast<std::size_t>(k)] = clamp_index(b - 1 + k, in_len);
            taps[d].weight[static_cast<std::size_t>(k)] = keys_cubic(t - static_cast<double>(k - 1));
        }
    }
    return taps;
}

} // namespace detail

/// Normalized 1-D Gaussian taps of radius ceil(3 * zeta).
inline std::vector<double> gaussian_taps(double zeta) {
    if (!(zeta > 0.0)) throw ArgumentError("gaussian blur: zeta must be positive");
    const auto radius = static_cast<std::ptrdiff_t>(std::ceil(3.0 * zeta));
    std::vector<double> taps;
    double total = 0.0;
    for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
        const double kd = static_cast<double>(k);
        taps.push_back(std::exp(-kd * kd / (2.0 * zeta * zeta)));
        total += taps.back();
    }
    for (double& t : taps) t /= total;
    return taps;
}

/// Separable Gaussian blur with replicate padding.
inline Image gaussian_blur(const Image& img, double zeta) {
    const auto taps = gaussian_taps(zeta);
    return detail::filter_1d(detail::filter_1d(img, taps, true), taps, false);
}

/// Keeps every s-th pixel, starting at index 0 on both axes.
inline Image downsample(const Image& img, std::size_t s) {
    if (s == 0) throw ArgumentError("downsample: factor must be >= 1");
    if (img.height() % s != 0 || img.width() % s != 0)
        throw ArgumentError("downsample: image dimensions not divisible by factor " + std::to_string(s));
    Image out(img.height() / s, img.width() / s);
    for (std::size_t r = 0; r < out.height(); ++r)
        for (std::size_t c = 0; c < out.width(); ++c) out(r, c) = img(r * s, c * s);
    return out;
}

/// Bicubic (Keys, a = -0.5) resize by factor `s` to round(s*H) x round(s*W),
/// replicate boundary.
inline Image bicubic_resize(const Image& img, double s) {
    if (!(s > 0.0)) throw ArgumentError("bicubic_resize: scale must be positive");
    const auto out_h = static_cast<std::size_t>(std::llround(s * static_cast<double>(img.height())));
    const auto out_w = static_cast<std::size_t>(std::llround(s * static_cast<double>(img.width())));
    if (out_h < 1 || out_w < 1) throw ArgumentError("bicubic_resize: output would be empty");

    const auto col_taps = detail::cubic_taps(img.width(), out_w, s);
    const auto row_taps = detail::cubic_taps(img.height(), out_h, s);

    Image horiz(img.height(), out_w);
    for (std::size_t r = 0; r < img.height(); ++r)
        for (std::size_t c = 0; c < out_w; ++c) {
            const auto& t = col_taps[c];
            double acc = 0.0;
            for (std::size_t k = 0; k < 4; ++k) acc += t.weight[k] * img(r, t.index[k]);
            horiz(r, c) = acc;
        }

    Image out(out_h, out_w);
    for (std::size_t r = 0; r < out_h; ++r) {
        const auto& t = row_taps[r];
        for (std::size_t c = 0; c < out_w; ++c) {
            double acc = 0.0;
            for (std::size_t k = 0; k < 4; ++k) acc += t.weight[k] * horiz(t.index[k], c);
            out(r, c) = acc;
        }
    }
    return out;
}

} // namespace dnsp
