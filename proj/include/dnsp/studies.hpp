#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "linalg.hpp"
#include "metrics.hpp"
#include "priors.hpp"
#include "resample.hpp"

namespace dnsp {

/// One point of a parameter sweep.
struct StudyRow {
    double parameter = 0.0;
    double value = 0.0;

    friend bool operator==(const StudyRow&, const StudyRow&) = default;
};

/// PSNR of the rank-r truncation against the image, for each requested rank.
/// Rows come back sorted by rank.
inline std::vector<StudyRow> rank_study(const Image& img, std::vector<std::size_t> ranks) {
    const std::size_t full = std::min(img.height(), img.width());
    for (std::size_t r : ranks)
        if (r > full) throw ArgumentError("rank_study: rank " + std::to_string(r) + " out of range");
    std::sort(ranks.begin(), ranks.end());
    std::vector<StudyRow> rows;
    if (ranks.empty()) return rows;
    // ||Y - Y_r||_F^2 = sum_{i >= r} sigma_i^2, accumulated from the smallest
    const SvdResult f = svd(img);
    std::vector<double> tail(full + 1, 0.0);
    for (std::size_t i = full; i-- > 0;) tail[i] = tail[i + 1] + f.sigma[i] * f.sigma[i];
    const double n = static_cast<double>(img.size());
    for (std::size_t r : ranks) {
        const double mse = tail[r] / n;
        rows.push_back({static_cast<double>(r),
                        mse == 0.0 ? std::numeric_limits<double>::infinity() : 10.0 * std::log10(1.0 / mse)});
    }
    return rows;
}

/// Variance of the Laplacian (replicate padding) after blurring with each
/// zeta; rows sorted by zeta.
inline std::vector<StudyRow> sharpness_study(const Image& img, std::vector<double> zetas) {
    for (double z : zetas)
        if (!(z > 0.0)) throw ArgumentError("sharpness_study: blur parameters must be positive");
    std::sort(zetas.begin(), zetas.end());
    std::vector<StudyRow> rows;
    for (double z : zetas)
        rows.push_back({z, variance_of_laplacian(gaussian_blur(img, z), PaddingMode::Replicate)});
    return rows;
}

} // namespace dnsp
