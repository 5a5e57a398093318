#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <random>
#include <set>
#include <vector>

#include "image.hpp"
#include "priors.hpp"
#include "resample.hpp"

namespace dnsp {

/// Blur, decimate by s, then bicubic-enlarge back to the input grid.
inline Image simulate_lr(const Image& hr, std::size_t s, double blur_sigma) {
    if (s == 0 || hr.height() % s != 0 || hr.width() % s != 0)
        throw ArgumentError("simulate_lr: dimensions must be divisible by the scale (crop first)");
    return bicubic_resize(downsample(gaussian_blur(hr, blur_sigma), s), static_cast<double>(s));
}

/// Network input (bicubic-enlarged LR) and its ground-truth HR patch.
struct PatchPair {
    Image x_s;
    Image y_g;
};

struct PatchDataset {
    std::vector<PatchPair> pairs;
    std::vector<Image> sharp;
    std::vector<Image> smooth;
};

/// Window origins along one axis: 0, stride, 2*stride, ... plus a final
/// window clamped to the border when the grid does not end exactly there.
inline std::vector<std::size_t> window_origins(std::size_t length, std::size_t patch, std::size_t stride) {
    std::vector<std::size_t> out;
    for (std::size_t p = 0; p + patch <= length; p += stride) out.push_back(p);
    if (out.back() + patch < length) out.push_back(length - patch);
    return out;
}

/// Co-located patches of x_s and y_g in row-major window order.
inline std::vector<PatchPair> extract_patches(const Image& x_s, const Image& y_g, std::size_t patch_size,
                                              std::size_t stride) {
    if (!x_s.same_shape(y_g)) throw DimensionError("extract_patches: images differ in shape");
    if (patch_size == 0 || stride == 0) throw ArgumentError("extract_patches: patch size and stride must be positive");
    if (patch_size > x_s.height() || patch_size > x_s.width())
        throw ArgumentError("extract_patches: patch larger than image");
    std::vector<PatchPair> out;
    for (std::size_t r : window_origins(x_s.height(), patch_size, stride))
        for (std::size_t c : window_origins(x_s.width(), patch_size, stride))
            out.push_back({crop(x_s, r, c, patch_size, patch_size), crop(y_g, r, c, patch_size, patch_size)});
    return out;
}

/// Where a selected patch came from.
struct PatchRecord {
    std::size_t image = 0;
    std::size_t row = 0;
    std::size_t col = 0;
    double score = 0.0;
};

struct SharpSmoothSelection {
    std::vector<Image> sharp;
    std::vector<Image> smooth;
    std::vector<PatchRecord> sharp_records;
    std::vector<PatchRecord> smooth_records;
};

/// ||conv2d_same(window, L, Zero)||_F^2 for every P x P window, indexed
/// [row * (W - P + 1) + col]. Interior pixels of a window see only in-window
/// neighbours, so they reuse one full-image Laplacian; the window border is
/// evaluated with zero padding.
inline std::vector<double> window_laplacian_scores(const Image& img, std::size_t patch) {
    if (patch < 3) throw ArgumentError("window_laplacian_scores: patch size must be >= 3");
    if (patch > img.height() || patch > img.width())
        throw ArgumentError("window_laplacian_scores: patch larger than image");
    const Image q = conv2d_same(img, laplacian_kernel(), PaddingMode::Zero);
    const std::size_t nr = img.height() - patch + 1;
    const std::size_t nc = img.width() - patch + 1;
    std::vector<double> scores(nr * nc);
    for (std::size_t r0 = 0; r0 < nr; ++r0) {
        for (std::size_t c0 = 0; c0 < nc; ++c0) {
            auto local = [&](std::size_t r, std::size_t c) {
                double v = 4.0 * img(r0 + r, c0 + c);
                if (r > 0) v -= img(r0 + r - 1, c0 + c);
                if (r + 1 < patch) v -= img(r0 + r + 1, c0 + c);
                if (c > 0) v -= img(r0 + r, c0 + c - 1);
                if (c + 1 < patch) v -= img(r0 + r, c0 + c + 1);
                return v * v;
            };
            double interior = 0.0;
            for (std::size_t r = 1; r + 1 < patch; ++r) {
                const double* qr = q.row(r0 + r) + c0;
                for (std::size_t c = 1; c + 1 < patch; ++c) interior += qr[c] * qr[c];
            }
            double border = 0.0;
            for (std::size_t c = 0; c < patch; ++c) border += local(0, c) + local(patch - 1, c);
            for (std::size_t r = 1; r + 1 < patch; ++r) border += local(r, 0) + local(r, patch - 1);
            scores[r0 * nc + c0] = interior + border;
        }
    }
    return scores;
}

/// Per image, the window with the largest (sharp) and smallest (smooth)
/// Laplacian energy; ties go to the first window in row-major order. Images
/// whose index appears in `exclusions` are skipped.
inline SharpSmoothSelection select_sharp_smooth(const std::vector<Image>& images, std::size_t patch_size,
                                                const std::vector<std::size_t>& exclusions) {
    if (images.empty()) throw ArgumentError("select_sharp_smooth: no images");
    const std::set<std::size_t> excluded(exclusions.begin(), exclusions.end());
    SharpSmoothSelection sel;
    for (std::size_t i = 0; i < images.size(); ++i) {
        if (excluded.contains(i)) continue;
        const Image& img = images[i];
        const auto scores = window_laplacian_scores(img, patch_size);
        const std::size_t nc = img.width() - patch_size + 1;
        const auto hi = std::max_element(scores.begin(), scores.end()) - scores.begin();
        const auto lo = std::min_element(scores.begin(), scores.end()) - scores.begin();
        auto record = [&](std::ptrdiff_t k) {
            const auto idx = static_cast<std::size_t>(k);
            return PatchRecord{i, idx / nc, idx % nc, scores[idx]};
        };
        sel.sharp_records.push_back(record(hi));
        sel.smooth_records.push_back(record(lo));
        const auto& sh = sel.sharp_records.back();
        const auto& sm = sel.smooth_records.back();
        sel.sharp.push_back(crop(img, sh.row, sh.col, patch_size, patch_size));
        sel.smooth.push_back(crop(img, sm.row, sm.col, patch_size, patch_size));
    }
    if (sel.sharp.empty()) throw ArgumentError("select_sharp_smooth: every image is excluded");
    return sel;
}

struct DatasetOptions {
    std::size_t scale = 2;
    double blur_sigma = 1.0;
    std::size_t patch_size = 40;
    std::size_t stride = 20;
    std::vector<std::size_t> exclusions;
    bool select_patches = true;
};

/// Training pairs from simulated LR versions of `hr_images` (each cropped to
/// a multiple of the scale) plus the sharp/smooth patch sets.
inline PatchDataset build_dataset(const std::vector<Image>& hr_images, const DatasetOptions& opt) {
    PatchDataset ds;
    std::vector<Image> cropped;
    for (const auto& hr : hr_images) {
        Image gt = crop_to_multiple(hr, opt.scale);
        const Image x_s = simulate_lr(gt, opt.scale, opt.blur_sigma);
        auto pairs = extract_patches(x_s, gt, opt.patch_size, opt.stride);
        ds.pairs.insert(ds.pairs.end(), std::make_move_iterator(pairs.begin()), std::make_move_iterator(pairs.end()));
        cropped.push_back(std::move(gt));
    }
    if (opt.select_patches) {
        auto sel = select_sharp_smooth(cropped, opt.patch_size, opt.exclusions);
        ds.sharp = std::move(sel.sharp);
        ds.smooth = std::move(sel.smooth);
    }
    return ds;
}

/// Procedural grayscale test image in [0.05, 0.95]: a smooth shading field,
/// oriented gratings confined to part of the frame, and a few hard-edged
/// discs and rectangles.
inline Image make_textured_image(std::size_t height, std::size_t width, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double pi = std::numbers::pi;
    const double h = static_cast<double>(height);
    const double w = static_cast<double>(width);

    Image img(height, width);
    const double gx = u(rng) - 0.5, gy = u(rng) - 0.5, g0 = 0.3 + 0.4 * u(rng);
    struct Grating { double fx, fy, phase, amp; };
    std::vector<Grating> gratings;
    for (int k = 0; k < 3; ++k) {
        const double freq = 0.08 + 0.25 * u(rng);
        const double theta = pi * u(rng);
        gratings.push_back({freq * std::cos(theta), freq * std::sin(theta), 2 * pi * u(rng), 0.05 + 0.1 * u(rng)});
    }
    // gratings fade out over a random half-plane so every image keeps a flat region
    const double mask_theta = 2 * pi * u(rng);
    const double mx = std::cos(mask_theta), my = std::sin(mask_theta);

    for (std::size_t r = 0; r < height; ++r)
        for (std::size_t c = 0; c < width; ++c) {
            const double y = static_cast<double>(r), x = static_cast<double>(c);
            double v = g0 + 0.3 * (gx * x / w + gy * y / h);
            const double side = ((x / w - 0.5) * mx + (y / h - 0.5) * my) * 8.0;
            const double mask = 1.0 / (1.0 + std::exp(-side));
            for (const auto& g : gratings) v += mask * g.amp * std::sin(2 * pi * (g.fx * x + g.fy * y) + g.phase);
            img(r, c) = v;
        }

    const int shapes = 3 + static_cast<int>(u(rng) * 3.0);
    for (int k = 0; k < shapes; ++k) {
        const double cy = u(rng) * h, cx = u(rng) * w;
        const double size = (0.08 + 0.15 * u(rng)) * std::min(h, w);
        const double level = (u(rng) - 0.5) * 0.5;
        const bool disc = u(rng) < 0.5;
        for (std::size_t r = 0; r < height; ++r)
            for (std::size_t c = 0; c < width; ++c) {
                const double dy = static_cast<double>(r) - cy, dx = static_cast<double>(c) - cx;
                const bool inside = disc ? dx * dx + dy * dy <= size * size
                                         : std::abs(dx) <= size && std::abs(dy) <= 0.6 * size;
                if (inside) img(r, c) += level;
            }
    }

    // fine grain keeps the image numerically full rank
    for (double& v : img.values()) v += 0.02 * (u(rng) - 0.5);

    auto [lo, hi] = std::minmax_element(img.values().begin(), img.values().end());
    const double a = *lo, span = std::max(*hi - *lo, 1e-12);
    for (double& v : img.values()) v = std::clamp(0.05 + 0.9 * (v - a) / span, 0.05, 0.95);
    return img;
}

} // namespace dnsp
