#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "network.hpp"
#include "priors.hpp"
#include "train.hpp"

// Finite-difference verification of every analytic gradient. The oracles
// only ever evaluate the scalar objectives; they never call the gradient
// code they are compared against.

namespace dnsp::gradcheck {

inline constexpr double fd_step = 1e-6;

struct Report {
    std::string name;
    double max_rel_error = 0.0;
    double tolerance = 0.0;
    std::size_t draws = 0;
    std::size_t skipped = 0;

    bool passed() const { return draws > 0 && max_rel_error <= tolerance; }
};

/// ||a - b||_2 / max(||a||_2, ||b||_2). Two exact zeros compare equal.
inline double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
    double diff = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff += (a[i] - b[i]) * (a[i] - b[i]);
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    const double denom = std::sqrt(std::max(na, nb));
    if (denom == 0.0) return std::sqrt(diff);
    return std::sqrt(diff) / denom;
}

/// Central differences of f over every entry of x.
inline std::vector<double> central_differences(std::vector<double> x,
                                               const std::function<double(const std::vector<double>&)>& f,
                                               double h = fd_step) {
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double x0 = x[i];
        x[i] = x0 + h;
        const double fp = f(x);
        x[i] = x0 - h;
        const double fm = f(x);
        x[i] = x0;
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

inline Image random_image(std::size_t h, std::size_t w, std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    Image img(h, w);
    for (double& v : img.values()) v = u(rng);
    return img;
}

inline SharpnessFilterBank random_bank(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> noise(0.0, 0.5);
    std::vector<Kernel2D> filters(n, laplacian_kernel());
    for (auto& f : filters)
        for (double& v : f.values()) v += noise(rng);
    return SharpnessFilterBank(std::move(filters));
}

inline Image image_from(const Image& like, const std::vector<double>& v) {
    return Image(like.height(), like.width(), v);
}

inline std::vector<double> to_vector(std::span<const double> v) { return {v.begin(), v.end()}; }

inline std::vector<double> flatten(const std::vector<Kernel2D>& ks) {
    std::vector<double> out;
    for (const auto& k : ks) out.insert(out.end(), k.values().begin(), k.values().end());
    return out;
}

inline SharpnessFilterBank bank_from(std::size_t n, const std::vector<double>& coeffs) {
    SharpnessFilterBank b(std::vector<Kernel2D>(n, Kernel2D(3, 3)));
    b.assign(coeffs);
    return b;
}

/// Rank-surrogate gradient on random square matrices whose singular values
/// lie in the active range (0, ~4 delta) of the surrogate.
inline Report check_rank(std::uint64_t seed, std::size_t n = 12, std::size_t draws = 50) {
    Report rep{"rank_surrogate_grad", 0.0, 1e-4, 0, 0};
    const RankSurrogateConfig cfg{0.01};
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> entry(0.0, cfg.delta / 2.0);
    for (std::size_t d = 0; d < draws; ++d) {
        Image y(n, n);
        for (double& v : y.values()) v = entry(rng);
        const auto analytic = rank_surrogate_grad(y, cfg);
        if (analytic.near_degenerate) {
            ++rep.skipped;
            continue;
        }
        const auto fd = central_differences(to_vector(y.values()), [&](const std::vector<double>& x) {
            return rank_surrogate(image_from(y, x), cfg);
        });
        rep.max_rel_error = std::max(rep.max_rel_error, relative_error(to_vector(analytic.grad.values()), fd));
        ++rep.draws;
    }
    return rep;
}

inline Report check_variance_of_laplacian(std::uint64_t seed, std::size_t n = 10, std::size_t draws = 50) {
    Report rep{"variance_of_laplacian_grad", 0.0, 1e-8, 0, 0};
    std::mt19937_64 rng(seed);
    for (std::size_t d = 0; d < draws; ++d) {
        const PaddingMode mode = d % 2 ? PaddingMode::Zero : PaddingMode::Replicate;
        const Image y = random_image(n, n, rng);
        const auto fd = central_differences(to_vector(y.values()), [&](const std::vector<double>& x) {
            return variance_of_laplacian(image_from(y, x), mode);
        });
        rep.max_rel_error =
            std::max(rep.max_rel_error, relative_error(to_vector(variance_of_laplacian_grad(y, mode).values()), fd));
        ++rep.draws;
    }
    return rep;
}

inline Report check_v_mod_image(std::uint64_t seed, std::size_t n = 10, std::size_t draws = 50) {
    Report rep{"v_mod_grad_image", 0.0, 1e-8, 0, 0};
    std::mt19937_64 rng(seed);
    for (std::size_t d = 0; d < draws; ++d) {
        const PaddingMode mode = d % 2 ? PaddingMode::Zero : PaddingMode::Replicate;
        const Image y = random_image(n, n, rng);
        const SharpnessFilterBank bank = random_bank(3, rng);
        const auto fd = central_differences(to_vector(y.values()), [&](const std::vector<double>& x) {
            return v_mod(image_from(y, x), bank, mode);
        });
        rep.max_rel_error =
            std::max(rep.max_rel_error, relative_error(to_vector(v_mod_grad_image(y, bank, mode).values()), fd));
        ++rep.draws;
    }
    return rep;
}

inline Report check_v_mod_filters(std::uint64_t seed, std::size_t n = 10, std::size_t draws = 50) {
    Report rep{"v_mod_grad_filters", 0.0, 1e-8, 0, 0};
    std::mt19937_64 rng(seed);
    for (std::size_t d = 0; d < draws; ++d) {
        const PaddingMode mode = d % 2 ? PaddingMode::Zero : PaddingMode::Replicate;
        const Image y = random_image(n, n, rng);
        const SharpnessFilterBank bank = random_bank(3, rng);
        const auto fd = central_differences(bank.flatten(), [&](const std::vector<double>& w) {
            return v_mod(y, bank_from(bank.size(), w), mode);
        });
        rep.max_rel_error = std::max(rep.max_rel_error, relative_error(flatten(v_mod_grad_filters(y, bank, mode)), fd));
        ++rep.draws;
    }
    return rep;
}

inline Report check_sharpness_measure(std::uint64_t seed, std::size_t n = 10, std::size_t draws = 50) {
    Report rep{"sharpness_measure_grad", 0.0, 1e-8, 0, 0};
    std::mt19937_64 rng(seed);
    for (std::size_t d = 0; d < draws; ++d) {
        const PaddingMode mode = d % 2 ? PaddingMode::Zero : PaddingMode::Replicate;
        const SharpnessFilterBank bank = random_bank(3, rng);
        std::vector<Image> smooth, sharp;
        for (int k = 0; k < 2; ++k) {
            smooth.push_back(gaussian_blur(random_image(n, n, rng), 1.5));
            sharp.push_back(random_image(n, n, rng));
        }
        const auto fd = central_differences(bank.flatten(), [&](const std::vector<double>& w) {
            return sharpness_measure(bank_from(bank.size(), w), smooth, sharp, mode);
        });
        rep.max_rel_error = std::max(rep.max_rel_error,
                                     relative_error(flatten(sharpness_measure_grad(bank, smooth, sharp, mode)), fd));
        ++rep.draws;
    }
    return rep;
}

namespace detail {

inline std::vector<bool> relu_mask(const NetworkParams& theta, const ForwardCache& cache) {
    std::vector<bool> mask;
    for (std::size_t l = 0; l < theta.layer_count(); ++l)
        if (theta.architecture()[l].activation == Activation::ReLU)
            for (double v : cache.pre[l]) mask.push_back(v > 0.0);
    return mask;
}

} // namespace detail

/// Gradient of the full regularized loss (all priors active) with respect to
/// every network weight and bias and every sharpness-filter coefficient, as
/// produced by the training path. Coordinates whose +-h perturbation flips a
/// ReLU are left out.
inline Report check_network(std::uint64_t seed, std::size_t n = 8, std::size_t draws = 5) {
    Report rep{"network_loss_grad", 0.0, 1e-6, 0, 0};
    std::mt19937_64 rng(seed);
    const Architecture arch{{3, 3, 1, 2, Activation::ReLU}, {3, 3, 2, 1, Activation::Identity}};
    LossConfig loss;
    loss.alpha = 0.1;
    loss.beta = 0.05;
    loss.gamma = 0.01;
    loss.delta = 0.5;
    std::normal_distribution<double> wdist(0.0, 0.4);

    for (std::size_t d = 0; d < draws; ++d) {
        NetworkParams theta(arch);
        for (double& v : theta.values()) v = wdist(rng);
        PatchDataset data;
        data.pairs.push_back({random_image(n, n, rng), random_image(n, n, rng)});
        data.smooth = {gaussian_blur(random_image(n, n, rng), 1.5)};
        data.sharp = {random_image(n, n, rng)};
        const SharpnessFilterBank bank = random_bank(2, rng);
        loss.prior_padding = d % 2 ? PaddingMode::Zero : PaddingMode::Replicate;

        const BatchGradients g = batch_gradients(theta, bank, data, {0}, loss, true);
        const auto& sample = data.pairs.front();
        const auto base_mask = detail::relu_mask(theta, forward(theta, sample.x_s).second);

        auto objective = [&](const NetworkParams& t, const SharpnessFilterBank& b) {
            const Image y = forward(t, sample.x_s).first;
            return loss_dnsp(y, sample.y_g, loss, b, data.smooth, data.sharp).total;
        };

        std::vector<double> analytic, numeric;
        NetworkParams probe = theta;
        for (std::size_t i = 0; i < theta.parameter_count(); ++i) {
            const double x0 = probe.values()[i];
            probe.values()[i] = x0 + fd_step;
            const bool stable_p = detail::relu_mask(probe, forward(probe, sample.x_s).second) == base_mask;
            const double fp = objective(probe, bank);
            probe.values()[i] = x0 - fd_step;
            const bool stable_m = detail::relu_mask(probe, forward(probe, sample.x_s).second) == base_mask;
            const double fm = objective(probe, bank);
            probe.values()[i] = x0;
            if (!stable_p || !stable_m) {
                ++rep.skipped;
                continue;
            }
            analytic.push_back(g.theta.values()[i]);
            numeric.push_back((fp - fm) / (2.0 * fd_step));
        }
        const auto fd_bank = central_differences(bank.flatten(), [&](const std::vector<double>& w) {
            return objective(theta, bank_from(bank.size(), w));
        });
        analytic.insert(analytic.end(), g.bank.begin(), g.bank.end());
        numeric.insert(numeric.end(), fd_bank.begin(), fd_bank.end());
        rep.max_rel_error = std::max(rep.max_rel_error, relative_error(analytic, numeric));
        ++rep.draws;
    }
    return rep;
}

enum class Which { Rank, Sharpness, VMod, SMeasure, Network, All };

inline Which which_from_string(const std::string& s) {
    if (s == "rank") return Which::Rank;
    if (s == "sharpness") return Which::Sharpness;
    if (s == "vmod") return Which::VMod;
    if (s == "smeasure") return Which::SMeasure;
    if (s == "network") return Which::Network;
    if (s == "all") return Which::All;
    throw ArgumentError("unknown gradient check '" + s + "'");
}

/// Runs the selected checks. `size` == 0 keeps each check's default size.
inline std::vector<Report> run(Which which, std::uint64_t seed, std::size_t size = 0) {
    auto pick = [&](std::size_t fallback) { return size ? size : fallback; };
    std::vector<Report> out;
    const bool all = which == Which::All;
    if (all || which == Which::Rank) out.push_back(check_rank(seed, pick(12)));
    if (all || which == Which::Sharpness) out.push_back(check_variance_of_laplacian(seed + 1, pick(10)));
    if (all || which == Which::VMod) {
        out.push_back(check_v_mod_image(seed + 2, pick(10)));
        out.push_back(check_v_mod_filters(seed + 3, pick(10)));
    }
    if (all || which == Which::SMeasure) out.push_back(check_sharpness_measure(seed + 4, pick(10)));
    if (all || which == Which::Network) out.push_back(check_network(seed + 5, pick(8)));
    return out;
}

} // namespace dnsp::gradcheck
