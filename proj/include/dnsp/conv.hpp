#pragma once

#include <cstddef>
#include <optional>

#include "image.hpp"

namespace dnsp {

namespace detail {

/// Maps a possibly out-of-range coordinate onto the padded source grid.
/// Returns nullopt where zero padding supplies the value.
inline std::optional<std::size_t> pad_index(std::ptrdiff_t i, std::size_t n, PaddingMode mode) {
    const auto len = static_cast<std::ptrdiff_t>(n);
    if (i >= 0 && i < len) return static_cast<std::size_t>(i);
    if (mode == PaddingMode::Zero) return std::nullopt;
    return static_cast<std::size_t>(i < 0 ? 0 : len - 1);
}

inline void check_kernel_fits(const Image& img, const Kernel2D& k, const char* who) {
    if (k.height() > img.height() || k.width() > img.width())
        throw DimensionError(std::string(who) + ": kernel larger than image");
}

/// Visits every (output pixel, tap, source pixel) triple of a same-size
/// true convolution: out(i,j) += k(a,b) * in(i + ch - a, j + cw - b).
template <class Visit>
void for_each_tap(std::size_t h, std::size_t w, std::size_t kh, std::size_t kw, PaddingMode mode,
                  Visit&& visit) {
    const auto ch = static_cast<std::ptrdiff_t>(kh / 2);
    const auto cw = static_cast<std::ptrdiff_t>(kw / 2);
    for (std::size_t i = 0; i < h; ++i) {
        for (std::size_t a = 0; a < kh; ++a) {
            const auto r = pad_index(static_cast<std::ptrdiff_t>(i) + ch - static_cast<std::ptrdiff_t>(a), h, mode);
            if (!r) continue;
            for (std::size_t j = 0; j < w; ++j) {
                for (std::size_t b = 0; b < kw; ++b) {
                    const auto c = pad_index(static_cast<std::ptrdiff_t>(j) + cw - static_cast<std::ptrdiff_t>(b), w, mode);
                    if (!c) continue;
                    visit(i, j, a, b, *r, *c);
                }
            }
        }
    }
}

} // namespace detail

/// Same-size 2-D convolution. The kernel is flipped (true convolution), so
/// out(i,j) = sum_{a,b} k(a,b) * img(i + kh/2 - a, j + kw/2 - b) with the
/// out-of-range samples supplied by `mode`.
inline Image conv2d_same(const Image& img, const Kernel2D& k, PaddingMode mode) {
    detail::check_kernel_fits(img, k, "conv2d_same");
    Image out(img.height(), img.width());
    detail::for_each_tap(img.height(), img.width(), k.height(), k.width(), mode,
                         [&](std::size_t i, std::size_t j, std::size_t a, std::size_t b,
                             std::size_t r, std::size_t c) { out(i, j) += k(a, b) * img(r, c); });
    return out;
}

/// Adjoint of conv2d_same with respect to its image argument:
/// <conv2d_same(A,k,m), B> == <A, conv2d_adjoint(B,k,m)> for all A, B.
inline Image conv2d_adjoint(const Image& grad_out, const Kernel2D& k, PaddingMode mode) {
    detail::check_kernel_fits(grad_out, k, "conv2d_adjoint");
    Image out(grad_out.height(), grad_out.width());
    detail::for_each_tap(grad_out.height(), grad_out.width(), k.height(), k.width(), mode,
                         [&](std::size_t i, std::size_t j, std::size_t a, std::size_t b,
                             std::size_t r, std::size_t c) { out(r, c) += k(a, b) * grad_out(i, j); });
    return out;
}

/// Gradient of <conv2d_same(img, k, mode), grad_out> with respect to the
/// kernel coefficients: entry (a,b) is the inner product of `grad_out` with
/// the correspondingly shifted (padded) image.
inline Kernel2D conv2d_kernel_grad(const Image& img, const Image& grad_out, std::size_t kh,
                                   std::size_t kw, PaddingMode mode) {
    if (!img.same_shape(grad_out))
        throw DimensionError("conv2d_kernel_grad: shape mismatch");
    Kernel2D g(kh, kw);
    detail::check_kernel_fits(img, g, "conv2d_kernel_grad");
    detail::for_each_tap(img.height(), img.width(), kh, kw, mode,
                         [&](std::size_t i, std::size_t j, std::size_t a, std::size_t b,
                             std::size_t r, std::size_t c) { g(a, b) += grad_out(i, j) * img(r, c); });
    return g;
}

} // namespace dnsp
