#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "conv.hpp"
#include "image.hpp"
#include "linalg.hpp"

namespace dnsp {

// ---------------------------------------------------------------------------
// Rank surrogate
// ---------------------------------------------------------------------------

struct RankSurrogateConfig {
    double delta = 0.01;
};

inline void check(const RankSurrogateConfig& cfg) {
    if (!(cfg.delta > 0.0)) throw ArgumentError("rank surrogate: delta must be positive");
}

/// Gaussian indicator of a zero singular value, exp(-x^2 / (2 delta^2)).
inline double g_delta(double x, const RankSurrogateConfig& cfg) {
    check(cfg);
    return std::exp(-(x * x) / (2.0 * cfg.delta * cfg.delta));
}

inline double rank_surrogate_from_sigma(const std::vector<double>& sigma, const RankSurrogateConfig& cfg) {
    double zeros = 0.0;
    for (double s : sigma) zeros += g_delta(s, cfg);
    return static_cast<double>(sigma.size()) - zeros;
}

/// Smooth rank estimate R - sum_i g_delta(sigma_i(Y)), R = min(rows, cols).
inline double rank_surrogate(const Image& y, const RankSurrogateConfig& cfg) {
    check(cfg);
    return rank_surrogate_from_sigma(svd(y).sigma, cfg);
}

struct RankSurrogateGrad {
    Image grad;
    /// Set when two singular values are closer than `degenerate_gap`; the
    /// gradient is still returned but finite-difference checks are unreliable.
    bool near_degenerate = false;
};

inline constexpr double degenerate_gap = 1e-8;

inline RankSurrogateGrad rank_surrogate_grad_from_svd(const SvdResult& f, const RankSurrogateConfig& cfg) {
    const double d2 = cfg.delta * cfg.delta;
    std::vector<double> w(f.sigma.size());
    bool degenerate = false;
    for (std::size_t i = 0; i < f.sigma.size(); ++i) {
        w[i] = f.sigma[i] / d2 * g_delta(f.sigma[i], cfg);
        if (i > 0 && f.sigma[i - 1] - f.sigma[i] < degenerate_gap) degenerate = true;
    }
    return {svd_compose(f, w), degenerate};
}

/// Gradient of rank_surrogate: U diag(sigma_i / delta^2 * g_delta(sigma_i)) Z^T.
inline RankSurrogateGrad rank_surrogate_grad(const Image& y, const RankSurrogateConfig& cfg) {
    check(cfg);
    return rank_surrogate_grad_from_svd(svd(y), cfg);
}

// ---------------------------------------------------------------------------
// Sharpness priors
// ---------------------------------------------------------------------------

/// The fixed 3x3 Laplacian stencil.
inline Kernel2D laplacian_kernel() {
    return Kernel2D::from_rows({{0, -1, 0}, {-1, 4, -1}, {0, -1, 0}});
}

/// Learnable bank of 3x3 sharpness filters.
class SharpnessFilterBank {
  public:
    SharpnessFilterBank() = default;

    explicit SharpnessFilterBank(std::vector<Kernel2D> filters) : filters_(std::move(filters)) {
        for (const auto& f : filters_)
            if (f.height() != 3 || f.width() != 3)
                throw DimensionError("SharpnessFilterBank: every filter must be 3x3");
    }

    /// Bank holding `n` exact copies of the Laplacian.
    static SharpnessFilterBank laplacian(std::size_t n = 1) {
        return SharpnessFilterBank(std::vector<Kernel2D>(n, laplacian_kernel()));
    }

    std::size_t size() const noexcept { return filters_.size(); }
    bool empty() const noexcept { return filters_.empty(); }
    const std::vector<Kernel2D>& filters() const noexcept { return filters_; }
    Kernel2D& operator[](std::size_t i) noexcept { return filters_[i]; }
    const Kernel2D& operator[](std::size_t i) const noexcept { return filters_[i]; }

    /// Coefficients of all filters, filter-major then row-major.
    std::vector<double> flatten() const {
        std::vector<double> out;
        out.reserve(9 * filters_.size());
        for (const auto& f : filters_) out.insert(out.end(), f.values().begin(), f.values().end());
        return out;
    }

    void assign(std::span<const double> coeffs) {
        if (coeffs.size() != 9 * filters_.size())
            throw DimensionError("SharpnessFilterBank::assign: wrong coefficient count");
        for (std::size_t i = 0; i < filters_.size(); ++i)
            std::copy_n(coeffs.begin() + static_cast<std::ptrdiff_t>(9 * i), 9, filters_[i].values().begin());
    }

    friend bool operator==(const SharpnessFilterBank&, const SharpnessFilterBank&) = default;

  private:
    std::vector<Kernel2D> filters_;
};

inline Image laplacian_response(const Image& y, const Kernel2D& k, PaddingMode mode) {
    return conv2d_same(y, k, mode);
}

namespace detail {

inline void check_variance_input(const Image& y, const char* who) {
    if (y.size() < 2) throw ArgumentError(std::string(who) + ": need at least two pixels");
}

/// Unbiased sample variance of all entries.
inline double sample_variance(const Image& p) {
    const double mu = mean(p);
    double acc = 0.0;
    for (double v : p.values()) acc += (v - mu) * (v - mu);
    return acc / static_cast<double>(p.size() - 1);
}

/// d var(P) / dP = 2 / (n - 1) * (P - mean(P)).
inline Image sample_variance_grad(const Image& p) {
    const double mu = mean(p);
    const double scale = 2.0 / static_cast<double>(p.size() - 1);
    Image d(p.height(), p.width());
    const auto pv = p.values();
    auto dv = d.values();
    for (std::size_t i = 0; i < pv.size(); ++i) dv[i] = scale * (pv[i] - mu);
    return d;
}

inline void check_bank(const SharpnessFilterBank& bank, const char* who) {
    if (bank.empty()) throw ArgumentError(std::string(who) + ": empty filter bank");
}

} // namespace detail

/// Variance of the Laplacian response, divisor n - 1 over all n pixels.
inline double variance_of_laplacian(const Image& y, PaddingMode mode) {
    detail::check_variance_input(y, "variance_of_laplacian");
    return detail::sample_variance(laplacian_response(y, laplacian_kernel(), mode));
}

/// Gradient of variance_of_laplacian with respect to Y, exact at the
/// boundary for the chosen padding mode.
inline Image variance_of_laplacian_grad(const Image& y, PaddingMode mode) {
    detail::check_variance_input(y, "variance_of_laplacian_grad");
    const Kernel2D lap = laplacian_kernel();
    return conv2d_adjoint(detail::sample_variance_grad(laplacian_response(y, lap, mode)), lap, mode);
}

/// Mean over the bank of the response variance of each filter.
inline double v_mod(const Image& y, const SharpnessFilterBank& bank, PaddingMode mode) {
    detail::check_bank(bank, "v_mod");
    detail::check_variance_input(y, "v_mod");
    double acc = 0.0;
    for (const auto& w : bank.filters()) acc += detail::sample_variance(conv2d_same(y, w, mode));
    return acc / static_cast<double>(bank.size());
}

inline Image v_mod_grad_image(const Image& y, const SharpnessFilterBank& bank, PaddingMode mode) {
    detail::check_bank(bank, "v_mod_grad_image");
    detail::check_variance_input(y, "v_mod_grad_image");
    Image total(y.height(), y.width());
    for (const auto& w : bank.filters()) {
        const Image back = conv2d_adjoint(detail::sample_variance_grad(conv2d_same(y, w, mode)), w, mode);
        auto tv = total.values();
        const auto bv = back.values();
        for (std::size_t i = 0; i < tv.size(); ++i) tv[i] += bv[i];
    }
    const double inv = 1.0 / static_cast<double>(bank.size());
    for (double& v : total.values()) v *= inv;
    return total;
}

/// Gradient of v_mod with respect to every filter coefficient.
inline std::vector<Kernel2D> v_mod_grad_filters(const Image& y, const SharpnessFilterBank& bank, PaddingMode mode) {
    detail::check_bank(bank, "v_mod_grad_filters");
    detail::check_variance_input(y, "v_mod_grad_filters");
    const double inv = 1.0 / static_cast<double>(bank.size());
    std::vector<Kernel2D> grads;
    grads.reserve(bank.size());
    for (const auto& w : bank.filters()) {
        const Image d = detail::sample_variance_grad(conv2d_same(y, w, mode));
        Kernel2D g = conv2d_kernel_grad(y, d, 3, 3, mode);
        for (double& v : g.values()) v *= inv;
        grads.push_back(std::move(g));
    }
    return grads;
}

// ---------------------------------------------------------------------------
// Sharpness-enhancing measure
// ---------------------------------------------------------------------------

namespace detail {

inline void check_patch_sets(const std::vector<Image>& smooth, const std::vector<Image>& sharp) {
    if (smooth.empty() || sharp.empty())
        throw ArgumentError("sharpness_measure: smooth and sharp patch lists must be non-empty");
    const Image& ref = smooth.front();
    for (const auto* set : {&smooth, &sharp})
        for (const auto& p : *set)
            if (!p.same_shape(ref)) throw ArgumentError("sharpness_measure: patches differ in size");
}

} // namespace detail

/// sum_i sum_j ||W_i * Sm_j||_F^2 - sum_i sum_j ||W_i * Sh_j||_F^2.
/// Negative when the sharp patches respond more strongly.
inline double sharpness_measure(const SharpnessFilterBank& bank, const std::vector<Image>& smooth,
                                const std::vector<Image>& sharp, PaddingMode mode) {
    detail::check_patch_sets(smooth, sharp);
    double smooth_energy = 0.0;
    double sharp_energy = 0.0;
    for (const auto& w : bank.filters()) {
        for (const auto& p : smooth) smooth_energy += frobenius_sq(conv2d_same(p, w, mode));
        for (const auto& p : sharp) sharp_energy += frobenius_sq(conv2d_same(p, w, mode));
    }
    return smooth_energy - sharp_energy;
}

inline std::vector<Kernel2D> sharpness_measure_grad(const SharpnessFilterBank& bank,
                                                    const std::vector<Image>& smooth,
                                                    const std::vector<Image>& sharp, PaddingMode mode) {
    detail::check_patch_sets(smooth, sharp);
    std::vector<Kernel2D> grads;
    grads.reserve(bank.size());
    for (const auto& w : bank.filters()) {
        Kernel2D g_smooth(3, 3), g_sharp(3, 3);
        auto accumulate = [&](const Image& patch, Kernel2D& g) {
            const Kernel2D part = conv2d_kernel_grad(patch, conv2d_same(patch, w, mode), 3, 3, mode);
            for (std::size_t i = 0; i < 9; ++i) g.values()[i] += part.values()[i];
        };
        for (const auto& p : smooth) accumulate(p, g_smooth);
        for (const auto& p : sharp) accumulate(p, g_sharp);
        Kernel2D g(3, 3);
        for (std::size_t i = 0; i < 9; ++i) g.values()[i] = 2.0 * (g_smooth.values()[i] - g_sharp.values()[i]);
        grads.push_back(std::move(g));
    }
    return grads;
}

} // namespace dnsp
