#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "image.hpp"
#include "priors.hpp"

namespace dnsp {

enum class Activation { ReLU, Identity };

inline const char* to_string(Activation a) { return a == Activation::ReLU ? "relu" : "identity"; }

inline Activation activation_from_string(const std::string& s) {
    if (s == "relu") return Activation::ReLU;
    if (s == "identity") return Activation::Identity;
    throw ArgumentError("unknown activation '" + s + "'");
}

struct LayerSpec {
    std::size_t kernel_h = 3;
    std::size_t kernel_w = 3;
    std::size_t in_channels = 1;
    std::size_t out_channels = 1;
    Activation activation = Activation::ReLU;

    std::size_t weight_count() const { return out_channels * in_channels * kernel_h * kernel_w; }

    friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

using Architecture = std::vector<LayerSpec>;

/// Three-layer 9-1-5 network with 64 and 32 feature maps.
inline Architecture default_architecture() {
    return {{9, 9, 1, 64, Activation::ReLU},
            {1, 1, 64, 32, Activation::ReLU},
            {5, 5, 32, 1, Activation::Identity}};
}

inline void validate_architecture(const Architecture& arch) {
    if (arch.empty()) throw ArgumentError("architecture: no layers");
    if (arch.front().in_channels != 1) throw ArgumentError("architecture: first layer must take 1 channel");
    for (std::size_t l = 0; l < arch.size(); ++l) {
        const auto& s = arch[l];
        if (s.kernel_h % 2 == 0 || s.kernel_w % 2 == 0)
            throw ArgumentError("architecture: layer " + std::to_string(l) + " kernel must be odd");
        if (s.in_channels == 0 || s.out_channels == 0)
            throw ArgumentError("architecture: layer " + std::to_string(l) + " has zero channels");
        if (l > 0 && arch[l - 1].out_channels != s.in_channels)
            throw ArgumentError("architecture: layer " + std::to_string(l) + " channel mismatch");
    }
    if (arch.back().out_channels != 1 || arch.back().activation != Activation::Identity)
        throw ArgumentError("architecture: last layer must be 1-channel identity");
}

/// Network weights and biases in one flat buffer, layer by layer
/// (weights as out x in x kh x kw, then biases). Gradients use the same type.
class NetworkParams {
  public:
    NetworkParams() = default;

    explicit NetworkParams(Architecture arch) : arch_(std::move(arch)) {
        validate_architecture(arch_);
        std::size_t offset = 0;
        for (const auto& s : arch_) {
            weight_offset_.push_back(offset);
            offset += s.weight_count();
            bias_offset_.push_back(offset);
            offset += s.out_channels;
        }
        values_.assign(offset, 0.0);
    }

    const Architecture& architecture() const noexcept { return arch_; }
    std::size_t layer_count() const noexcept { return arch_.size(); }
    std::size_t parameter_count() const noexcept { return values_.size(); }

    std::span<double> values() noexcept { return values_; }
    std::span<const double> values() const noexcept { return values_; }

    std::span<double> weights(std::size_t l) noexcept {
        return std::span<double>(values_).subspan(weight_offset_[l], arch_[l].weight_count());
    }
    std::span<const double> weights(std::size_t l) const noexcept {
        return std::span<const double>(values_).subspan(weight_offset_[l], arch_[l].weight_count());
    }
    std::span<double> biases(std::size_t l) noexcept {
        return std::span<double>(values_).subspan(bias_offset_[l], arch_[l].out_channels);
    }
    std::span<const double> biases(std::size_t l) const noexcept {
        return std::span<const double>(values_).subspan(bias_offset_[l], arch_[l].out_channels);
    }

    /// Weight (o, c, a, b) of layer l.
    double& weight(std::size_t l, std::size_t o, std::size_t c, std::size_t a, std::size_t b) noexcept {
        const auto& s = arch_[l];
        return weights(l)[((o * s.in_channels + c) * s.kernel_h + a) * s.kernel_w + b];
    }
    double weight(std::size_t l, std::size_t o, std::size_t c, std::size_t a, std::size_t b) const noexcept {
        const auto& s = arch_[l];
        return weights(l)[((o * s.in_channels + c) * s.kernel_h + a) * s.kernel_w + b];
    }

    bool same_shape(const NetworkParams& other) const noexcept { return arch_ == other.arch_; }

    friend bool operator==(const NetworkParams& a, const NetworkParams& b) {
        return a.arch_ == b.arch_ && a.values_ == b.values_;
    }

  private:
    Architecture arch_;
    std::vector<std::size_t> weight_offset_;
    std::vector<std::size_t> bias_offset_;
    std::vector<double> values_;
};

using ParamGrads = NetworkParams;

inline constexpr double init_weight_std = 1e-3;

/// Gaussian: weights ~ N(0, 1e-3^2), biases 0.
/// IdentityPath: the same draws, plus 1 on the center tap from channel 0 to
/// channel 0 of every layer, so the initial network passes non-negative
/// inputs through unchanged.
enum class InitScheme { Gaussian, IdentityPath };

inline const char* to_string(InitScheme s) { return s == InitScheme::Gaussian ? "gaussian" : "identity"; }

inline InitScheme init_scheme_from_string(const std::string& s) {
    if (s == "gaussian") return InitScheme::Gaussian;
    if (s == "identity") return InitScheme::IdentityPath;
    throw ArgumentError("unknown init scheme '" + s + "'");
}

/// Deterministic in `seed`.
inline NetworkParams init_params(const Architecture& arch, std::uint64_t seed,
                                 InitScheme scheme = InitScheme::Gaussian) {
    NetworkParams theta(arch);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, init_weight_std);
    for (std::size_t l = 0; l < theta.layer_count(); ++l)
        for (double& w : theta.weights(l)) w = noise(rng);
    if (scheme == InitScheme::IdentityPath)
        for (std::size_t l = 0; l < theta.layer_count(); ++l) {
            const auto& s = arch[l];
            theta.weight(l, 0, 0, s.kernel_h / 2, s.kernel_w / 2) += 1.0;
        }
    return theta;
}

/// Intermediate maps of one forward pass, each stored channel-major
/// (channels x height x width).
struct ForwardCache {
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<double> input;
    std::vector<std::vector<double>> pre;
    std::vector<std::vector<double>> post;
};

namespace detail {

struct TapWindow {
    std::ptrdiff_t dr, dc;
    std::size_t i0, i1, j0, j1;
};

/// Output rows/cols [i0,i1) x [j0,j1) that read an in-range source sample
/// for tap (a,b) under zero padding; source is (i + dr, j + dc).
inline TapWindow tap_window(std::size_t h, std::size_t w, const LayerSpec& s, std::size_t a, std::size_t b) {
    const auto dr = static_cast<std::ptrdiff_t>(s.kernel_h / 2) - static_cast<std::ptrdiff_t>(a);
    const auto dc = static_cast<std::ptrdiff_t>(s.kernel_w / 2) - static_cast<std::ptrdiff_t>(b);
    const auto H = static_cast<std::ptrdiff_t>(h);
    const auto W = static_cast<std::ptrdiff_t>(w);
    auto lo = [](std::ptrdiff_t d) { return static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, -d)); };
    auto hi = [](std::ptrdiff_t n, std::ptrdiff_t d) {
        return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(n - d, 0, n));
    };
    return {dr, dc, lo(dr), hi(H, dr), lo(dc), hi(W, dc)};
}

inline void conv_layer_forward(const LayerSpec& s, std::span<const double> w, std::span<const double> bias,
                               const double* in, double* out, std::size_t h, std::size_t wd) {
    const std::size_t hw = h * wd;
    for (std::size_t o = 0; o < s.out_channels; ++o) {
        double* out_o = out + o * hw;
        std::fill_n(out_o, hw, bias[o]);
        for (std::size_t c = 0; c < s.in_channels; ++c) {
            const double* in_c = in + c * hw;
            for (std::size_t a = 0; a < s.kernel_h; ++a)
                for (std::size_t b = 0; b < s.kernel_w; ++b) {
                    const double k = w[((o * s.in_channels + c) * s.kernel_h + a) * s.kernel_w + b];
                    const TapWindow t = tap_window(h, wd, s, a, b);
                    if (t.i0 >= t.i1 || t.j0 >= t.j1) continue;
                    const std::ptrdiff_t shift = t.dr * static_cast<std::ptrdiff_t>(wd) + t.dc;
                    for (std::size_t i = t.i0; i < t.i1; ++i) {
                        const std::size_t row = i * wd;
                        const double* src = in_c + static_cast<std::ptrdiff_t>(row + t.j0) + shift;
                        double* dst = out_o + row + t.j0;
                        const std::size_t n = t.j1 - t.j0;
                        for (std::size_t j = 0; j < n; ++j) dst[j] += k * src[j];
                    }
                }
        }
    }
}

inline double dot_rows(const double* x, const double* y, std::size_t n) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        s0 += x[j] * y[j];
        s1 += x[j + 1] * y[j + 1];
        s2 += x[j + 2] * y[j + 2];
        s3 += x[j + 3] * y[j + 3];
    }
    for (; j < n; ++j) s0 += x[j] * y[j];
    return (s0 + s1) + (s2 + s3);
}

/// Accumulates weight/bias gradients of one layer from the gradient at its
/// pre-activation, and (if grad_in is non-null) the gradient at its input.
inline void conv_layer_backward(const LayerSpec& s, std::span<const double> w, const double* in,
                                const double* grad_pre, std::span<double> grad_w, std::span<double> grad_b,
                                double* grad_in, std::size_t h, std::size_t wd) {
    const std::size_t hw = h * wd;
    for (std::size_t o = 0; o < s.out_channels; ++o) {
        const double* g_o = grad_pre + o * hw;
        double bsum = 0.0;
        for (std::size_t p = 0; p < hw; ++p) bsum += g_o[p];
        grad_b[o] += bsum;
        for (std::size_t c = 0; c < s.in_channels; ++c) {
            const double* in_c = in + c * hw;
            double* gin_c = grad_in ? grad_in + c * hw : nullptr;
            for (std::size_t a = 0; a < s.kernel_h; ++a)
                for (std::size_t b = 0; b < s.kernel_w; ++b) {
                    const std::size_t widx = ((o * s.in_channels + c) * s.kernel_h + a) * s.kernel_w + b;
                    const double k = w[widx];
                    const TapWindow t = tap_window(h, wd, s, a, b);
                    if (t.i0 >= t.i1 || t.j0 >= t.j1) continue;
                    const std::ptrdiff_t shift = t.dr * static_cast<std::ptrdiff_t>(wd) + t.dc;
                    double acc = 0.0;
                    for (std::size_t i = t.i0; i < t.i1; ++i) {
                        const std::size_t row = i * wd + t.j0;
                        const std::size_t n = t.j1 - t.j0;
                        const double* src = in_c + static_cast<std::ptrdiff_t>(row) + shift;
                        const double* g = g_o + row;
                        acc += dot_rows(g, src, n);
                        if (gin_c) {
                            double* dst = gin_c + static_cast<std::ptrdiff_t>(row) + shift;
                            for (std::size_t j = 0; j < n; ++j) dst[j] += k * g[j];
                        }
                    }
                    grad_w[widx] += acc;
                }
        }
    }
}

} // namespace detail

/// Runs the network on one single-channel image; output has the input's size.
inline std::pair<Image, ForwardCache> forward(const NetworkParams& theta, const Image& x_s) {
    if (!all_finite(x_s.values())) throw ArgumentError("forward: input contains non-finite values");
    ForwardCache cache;
    cache.height = x_s.height();
    cache.width = x_s.width();
    cache.input.assign(x_s.values().begin(), x_s.values().end());
    const std::size_t hw = x_s.size();
    const auto& arch = theta.architecture();
    for (std::size_t l = 0; l < arch.size(); ++l) {
        const auto& s = arch[l];
        const std::vector<double>& in = l == 0 ? cache.input : cache.post.back();
        std::vector<double> pre(s.out_channels * hw);
        detail::conv_layer_forward(s, theta.weights(l), theta.biases(l), in.data(), pre.data(), x_s.height(),
                                   x_s.width());
        std::vector<double> post = pre;
        if (s.activation == Activation::ReLU)
            for (double& v : post) v = v > 0.0 ? v : 0.0;
        cache.pre.push_back(std::move(pre));
        cache.post.push_back(std::move(post));
    }
    Image y(x_s.height(), x_s.width(), cache.post.back());
    return {std::move(y), std::move(cache)};
}

/// Backpropagates dE/dY through the cached forward pass.
inline ParamGrads backward(const NetworkParams& theta, const ForwardCache& cache, const Image& dE_dY) {
    const auto& arch = theta.architecture();
    const std::size_t hw = cache.height * cache.width;
    if (cache.pre.size() != arch.size() || cache.post.size() != arch.size() || cache.input.size() != hw)
        throw ConsistencyError("backward: cache does not match network depth");
    for (std::size_t l = 0; l < arch.size(); ++l)
        if (cache.pre[l].size() != arch[l].out_channels * hw)
            throw ConsistencyError("backward: cache layer " + std::to_string(l) + " has wrong shape");
    if (dE_dY.height() != cache.height || dE_dY.width() != cache.width)
        throw DimensionError("backward: output gradient shape mismatch");

    ParamGrads grads(arch);
    std::vector<double> grad(dE_dY.values().begin(), dE_dY.values().end());
    for (std::size_t l = arch.size(); l-- > 0;) {
        const auto& s = arch[l];
        if (s.activation == Activation::ReLU)
            for (std::size_t p = 0; p < grad.size(); ++p)
                if (!(cache.pre[l][p] > 0.0)) grad[p] = 0.0;
        const std::vector<double>& in = l == 0 ? cache.input : cache.post[l - 1];
        std::vector<double> grad_in;
        if (l > 0) grad_in.assign(s.in_channels * hw, 0.0);
        detail::conv_layer_backward(s, theta.weights(l), in.data(), grad.data(), grads.weights(l),
                                    grads.biases(l), l > 0 ? grad_in.data() : nullptr, cache.height,
                                    cache.width);
        grad = std::move(grad_in);
    }
    return grads;
}

// ---------------------------------------------------------------------------
// Regularized loss
// ---------------------------------------------------------------------------

struct LossConfig {
    double alpha = 1e-5;
    double beta = 5e-3;
    double gamma = 1e-7;
    double delta = 0.01;
    PaddingMode prior_padding = PaddingMode::Replicate;

    RankSurrogateConfig rank() const { return {delta}; }

    friend bool operator==(const LossConfig&, const LossConfig&) = default;
};

/// Unweighted loss terms; total = mse + alpha*lowrank - beta*sharpness + gamma*filter_measure.
struct LossParts {
    double mse = 0.0;
    double lowrank = 0.0;
    double sharpness = 0.0;
    double filter_measure = 0.0;
};

struct LossValue {
    double total = 0.0;
    LossParts parts;
};

inline double combine(const LossParts& p, const LossConfig& cfg) {
    return p.mse + cfg.alpha * p.lowrank - cfg.beta * p.sharpness + cfg.gamma * p.filter_measure;
}

inline double half_squared_error(const Image& y, const Image& y_g) {
    if (!y.same_shape(y_g)) throw DimensionError("loss: output and ground truth differ in shape");
    double acc = 0.0;
    const auto a = y.values();
    const auto b = y_g.values();
    for (std::size_t i = 0; i < a.size(); ++i) acc += (b[i] - a[i]) * (b[i] - a[i]);
    return 0.5 * acc;
}

/// Full regularized loss for one output. The filter measure is 0 when no
/// smooth/sharp patches are supplied.
inline LossValue loss_dnsp(const Image& y, const Image& y_g, const LossConfig& cfg, const SharpnessFilterBank& bank,
                           const std::vector<Image>& smooth, const std::vector<Image>& sharp) {
    LossParts p;
    p.mse = half_squared_error(y, y_g);
    p.lowrank = rank_surrogate(y, cfg.rank());
    p.sharpness = v_mod(y, bank, cfg.prior_padding);
    if (!smooth.empty() || !sharp.empty())
        p.filter_measure = sharpness_measure(bank, smooth, sharp, cfg.prior_padding);
    return {combine(p, cfg), p};
}

namespace detail {

inline Image output_grad_impl(const Image& y, const Image& y_g, const LossConfig& cfg,
                              const SharpnessFilterBank& bank, const SvdResult* factors) {
    if (!y.same_shape(y_g)) throw DimensionError("output_grad: output and ground truth differ in shape");
    Image g(y.height(), y.width());
    auto gv = g.values();
    const auto yv = y.values();
    const auto tv = y_g.values();
    for (std::size_t i = 0; i < gv.size(); ++i) gv[i] = -(tv[i] - yv[i]);
    if (cfg.alpha != 0.0) {
        const Image dr = factors ? rank_surrogate_grad_from_svd(*factors, cfg.rank()).grad
                                 : rank_surrogate_grad(y, cfg.rank()).grad;
        for (std::size_t i = 0; i < gv.size(); ++i) gv[i] += cfg.alpha * dr.values()[i];
    }
    if (cfg.beta != 0.0) {
        const Image dv = v_mod_grad_image(y, bank, cfg.prior_padding);
        for (std::size_t i = 0; i < gv.size(); ++i) gv[i] -= cfg.beta * dv.values()[i];
    }
    return g;
}

} // namespace detail

/// dE/dY = -(Y_g - Y) + alpha * D_R(Y) - beta * D_Vmod(Y). Prior terms with a
/// zero weight are skipped entirely.
inline Image output_grad(const Image& y, const Image& y_g, const LossConfig& cfg, const SharpnessFilterBank& bank) {
    return detail::output_grad_impl(y, y_g, cfg, bank, nullptr);
}

/// Same, reusing an SVD of `y` that the caller already has.
inline Image output_grad(const Image& y, const Image& y_g, const LossConfig& cfg, const SharpnessFilterBank& bank,
                         const SvdResult& factors) {
    return detail::output_grad_impl(y, y_g, cfg, bank, &factors);
}

/// perturbation variance of the Laplacian-initialized bank
inline constexpr double bank_init_variance = 1e-4;

/// `n_filters` Laplacians with additive N(0, 1e-4) perturbations.
inline SharpnessFilterBank init_sharpness_bank(std::size_t n_filters, std::uint64_t seed) {
    if (n_filters < 1) throw ArgumentError("init_sharpness_bank: need at least one filter");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, std::sqrt(bank_init_variance));
    std::vector<Kernel2D> filters(n_filters, laplacian_kernel());
    for (auto& f : filters)
        for (double& v : f.values()) v += noise(rng);
    return SharpnessFilterBank(std::move(filters));
}

} // namespace dnsp
