#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "image.hpp"

namespace dnsp {

/// PSNR in dB for a peak value of 1.0; +inf for identical images.
inline double psnr(const Image& a, const Image& b) {
    if (!a.same_shape(b)) throw DimensionError("psnr: shape mismatch");
    double acc = 0.0;
    const auto av = a.values();
    const auto bv = b.values();
    for (std::size_t i = 0; i < av.size(); ++i) acc += (av[i] - bv[i]) * (av[i] - bv[i]);
    const double mse = acc / static_cast<double>(av.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(1.0 / mse);
}

namespace detail {

inline constexpr std::size_t ssim_window = 11;
inline constexpr double ssim_sigma = 1.5;

inline std::vector<double> ssim_taps() {
    std::vector<double> taps(ssim_window);
    const double c = static_cast<double>(ssim_window / 2);
    double total = 0.0;
    for (std::size_t k = 0; k < ssim_window; ++k) {
        const double d = static_cast<double>(k) - c;
        taps[k] = std::exp(-d * d / (2.0 * ssim_sigma * ssim_sigma));
        total += taps[k];
    }
    for (double& t : taps) t /= total;
    return taps;
}

/// Separable Gaussian-weighted mean over every fully contained window.
inline Image valid_gaussian_mean(const Image& img, const std::vector<double>& taps) {
    const std::size_t n = taps.size();
    const std::size_t oh = img.height() - n + 1;
    const std::size_t ow = img.width() - n + 1;
    Image rows(img.height(), ow);
    for (std::size_t r = 0; r < img.height(); ++r)
        for (std::size_t c = 0; c < ow; ++c) {
            double acc = 0.0;
            for (std::size_t k = 0; k < n; ++k) acc += taps[k] * img(r, c + k);
            rows(r, c) = acc;
        }
    Image out(oh, ow);
    for (std::size_t r = 0; r < oh; ++r)
        for (std::size_t c = 0; c < ow; ++c) {
            double acc = 0.0;
            for (std::size_t k = 0; k < n; ++k) acc += taps[k] * rows(r + k, c);
            out(r, c) = acc;
        }
    return out;
}

inline Image product(const Image& a, const Image& b) {
    Image out(a.height(), a.width());
    for (std::size_t i = 0; i < a.size(); ++i) out.values()[i] = a.values()[i] * b.values()[i];
    return out;
}

} // namespace detail

/// Mean SSIM over all 11x11 Gaussian (sigma 1.5) windows, K1 = 0.01,
/// K2 = 0.03, dynamic range 1.0.
inline double ssim(const Image& a, const Image& b) {
    if (!a.same_shape(b)) throw DimensionError("ssim: shape mismatch");
    if (a.height() < detail::ssim_window || a.width() < detail::ssim_window)
        throw ArgumentError("ssim: images must be at least 11x11");
    constexpr double c1 = (0.01 * 1.0) * (0.01 * 1.0);
    constexpr double c2 = (0.03 * 1.0) * (0.03 * 1.0);
    const auto taps = detail::ssim_taps();
    const Image mu_a = detail::valid_gaussian_mean(a, taps);
    const Image mu_b = detail::valid_gaussian_mean(b, taps);
    const Image e_aa = detail::valid_gaussian_mean(detail::product(a, a), taps);
    const Image e_bb = detail::valid_gaussian_mean(detail::product(b, b), taps);
    const Image e_ab = detail::valid_gaussian_mean(detail::product(a, b), taps);
    double total = 0.0;
    for (std::size_t i = 0; i < mu_a.size(); ++i) {
        const double ma = mu_a.values()[i], mb = mu_b.values()[i];
        const double va = e_aa.values()[i] - ma * ma;
        const double vb = e_bb.values()[i] - mb * mb;
        const double cov = e_ab.values()[i] - ma * mb;
        const double num = (2.0 * ma * mb + c1) * (2.0 * cov + c2);
        const double den = (ma * ma + mb * mb + c1) * (va + vb + c2);
        total += num / den;
    }
    return total / static_cast<double>(mu_a.size());
}

struct MetricReport {
    double psnr_db = 0.0;
    double ssim = 0.0;
};

inline MetricReport evaluate(const Image& estimate, const Image& reference) {
    return {psnr(estimate, reference), ssim(estimate, reference)};
}

} // namespace dnsp
