#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "data.hpp"
#include "network.hpp"
#include "optim.hpp"
#include "priors.hpp"

namespace dnsp {

struct TrainConfig {
    std::size_t scale = 2;
    double blur_sigma = 1.0;
    std::size_t patch_size = 40;
    std::size_t stride = 20;
    std::size_t batch_size = 64;
    std::size_t epochs = 50;
    double learning_rate = 1e-4;
    OptimizerKind optimizer = OptimizerKind::Adam;
    LossConfig loss;
    std::size_t n_sharp_filters = 8;
    std::uint64_t seed = 0;
    Architecture architecture = default_architecture();
    InitScheme init = InitScheme::IdentityPath;
    /// When false the filter bank is held fixed (no filter gradients are used).
    bool learn_filters = true;
    std::vector<std::size_t> exclusions;

    DatasetOptions dataset_options() const {
        return {scale, blur_sigma, patch_size, stride, exclusions, true};
    }

    friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

inline void validate(const TrainConfig& cfg) {
    if (cfg.scale < 2 || cfg.scale > 4) throw ConfigError("scale must be 2, 3 or 4");
    if (!(cfg.blur_sigma > 0.0)) throw ConfigError("blur_sigma must be positive");
    if (cfg.patch_size < 3) throw ConfigError("patch_size must be at least 3");
    if (cfg.stride == 0) throw ConfigError("stride must be positive");
    if (cfg.batch_size == 0) throw ConfigError("batch_size must be positive");
    if (!(cfg.learning_rate >= 0.0)) throw ConfigError("learning_rate must be non-negative");
    if (cfg.loss.alpha < 0.0 || cfg.loss.beta < 0.0 || cfg.loss.gamma < 0.0)
        throw ConfigError("alpha, beta and gamma must be non-negative");
    if (!(cfg.loss.delta > 0.0)) throw ConfigError("delta must be positive");
    if (cfg.n_sharp_filters == 0) throw ConfigError("n_sharp_filters must be at least 1");
    try {
        validate_architecture(cfg.architecture);
    } catch (const ArgumentError& e) {
        throw ConfigError(e.what());
    }
}

/// Everything that evolves during training.
struct TrainState {
    NetworkParams theta;
    SharpnessFilterBank bank;
    AdamState theta_adam;
    AdamState bank_adam;
    std::uint64_t epoch = 0;

    friend bool operator==(const TrainState&, const TrainState&) = default;
};

/// Derived seeds so network, bank and shuffling draw independent streams.
inline std::uint64_t bank_seed(std::uint64_t seed) { return seed ^ 0x9e3779b97f4a7c15ULL; }

inline TrainState init_train_state(const TrainConfig& cfg) {
    TrainState s;
    s.theta = init_params(cfg.architecture, cfg.seed, cfg.init);
    s.bank = init_sharpness_bank(cfg.n_sharp_filters, bank_seed(cfg.seed));
    s.theta_adam = AdamState(s.theta.parameter_count());
    s.bank_adam = AdamState(9 * s.bank.size());
    return s;
}

/// Visiting order of `n` samples in a given epoch.
inline std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::uint64_t epoch) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(epoch), static_cast<std::uint32_t>(epoch >> 32), 0x5348u};
    std::mt19937_64 rng(seq);
    std::shuffle(order.begin(), order.end(), rng);
    return order;
}

/// Batch-mean loss and gradients for both parameter sets.
struct BatchGradients {
    ParamGrads theta;
    std::vector<double> bank;
    LossParts parts;
    double total = 0.0;
};

/// Mean over `indices` of the per-sample loss and gradients. The bank
/// gradient is -beta * mean dVmod/dW + gamma * dS/dW and is left at zero
/// when `learn_filters` is false.
inline BatchGradients batch_gradients(const NetworkParams& theta, const SharpnessFilterBank& bank,
                                      const PatchDataset& data, const std::vector<std::size_t>& indices,
                                      const LossConfig& loss, bool learn_filters) {
    if (indices.empty()) throw ArgumentError("batch_gradients: empty batch");
    BatchGradients out{ParamGrads(theta.architecture()), std::vector<double>(9 * bank.size(), 0.0), {}, 0.0};
    const bool has_patches = !data.smooth.empty() && !data.sharp.empty();
    const bool vmod_filter_grad = learn_filters && loss.beta != 0.0;
    std::vector<double> vmod_accum(vmod_filter_grad ? 9 * bank.size() : 0, 0.0);

    for (std::size_t idx : indices) {
        const PatchPair& sample = data.pairs.at(idx);
        auto [y, cache] = forward(theta, sample.x_s);
        const SvdResult f = svd(y);
        out.parts.mse += half_squared_error(y, sample.y_g);
        out.parts.lowrank += rank_surrogate_from_sigma(f.sigma, loss.rank());
        out.parts.sharpness += v_mod(y, bank, loss.prior_padding);

        const Image g = output_grad(y, sample.y_g, loss, bank, f);
        const ParamGrads gs = backward(theta, cache, g);
        auto acc = out.theta.values();
        const auto gsv = gs.values();
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += gsv[i];

        if (vmod_filter_grad) {
            const auto fg = v_mod_grad_filters(y, bank, loss.prior_padding);
            for (std::size_t l = 0; l < fg.size(); ++l)
                for (std::size_t k = 0; k < 9; ++k) vmod_accum[9 * l + k] += fg[l].values()[k];
        }
    }

    const double inv = 1.0 / static_cast<double>(indices.size());
    for (double& v : out.theta.values()) v *= inv;
    out.parts.mse *= inv;
    out.parts.lowrank *= inv;
    out.parts.sharpness *= inv;
    if (has_patches) out.parts.filter_measure = sharpness_measure(bank, data.smooth, data.sharp, loss.prior_padding);

    if (vmod_filter_grad)
        for (std::size_t k = 0; k < vmod_accum.size(); ++k) out.bank[k] -= loss.beta * (vmod_accum[k] * inv);
    if (learn_filters && loss.gamma != 0.0) {
        if (!has_patches) throw ConfigError("gamma > 0 requires smooth and sharp patches");
        const auto sg = sharpness_measure_grad(bank, data.smooth, data.sharp, loss.prior_padding);
        for (std::size_t l = 0; l < sg.size(); ++l)
            for (std::size_t k = 0; k < 9; ++k) out.bank[9 * l + k] += loss.gamma * sg[l].values()[k];
    }
    out.total = combine(out.parts, loss);
    return out;
}

inline void apply_step(TrainState& state, const BatchGradients& g, const TrainConfig& cfg) {
    std::vector<double> coeffs = state.bank.flatten();
    if (cfg.optimizer == OptimizerKind::SGD) {
        sgd_step(state.theta.values(), g.theta.values(), cfg.learning_rate);
        if (cfg.learn_filters) sgd_step(coeffs, g.bank, cfg.learning_rate);
    } else {
        adam_step(state.theta.values(), g.theta.values(), state.theta_adam, cfg.learning_rate);
        if (cfg.learn_filters) adam_step(coeffs, g.bank, state.bank_adam, cfg.learning_rate);
    }
    if (cfg.learn_filters) state.bank.assign(coeffs);
}

/// Per-epoch means over all samples of the total loss and its parts. The
/// filter measure is the value seen by each sample's batch.
struct EpochRecord {
    std::uint64_t epoch = 0;
    double total = 0.0;
    LossParts parts;
};

inline void check_dataset(const TrainConfig& cfg, const PatchDataset& data) {
    if (data.pairs.empty()) throw ConfigError("training dataset has no patch pairs");
    if (cfg.loss.gamma > 0.0 && (data.sharp.empty() || data.smooth.empty()))
        throw ConfigError("gamma > 0 requires smooth and sharp patches");
}

inline EpochRecord train_epoch(TrainState& state, const TrainConfig& cfg, const PatchDataset& data) {
    check_dataset(cfg, data);
    const auto order = epoch_order(data.pairs.size(), cfg.seed, state.epoch);
    EpochRecord rec;
    rec.epoch = state.epoch + 1;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
        const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
        const std::vector<std::size_t> batch(order.begin() + static_cast<std::ptrdiff_t>(begin),
                                             order.begin() + static_cast<std::ptrdiff_t>(end));
        const BatchGradients g = batch_gradients(state.theta, state.bank, data, batch, cfg.loss, cfg.learn_filters);
        const double w = static_cast<double>(batch.size());
        rec.total += w * g.total;
        rec.parts.mse += w * g.parts.mse;
        rec.parts.lowrank += w * g.parts.lowrank;
        rec.parts.sharpness += w * g.parts.sharpness;
        rec.parts.filter_measure += w * g.parts.filter_measure;
        apply_step(state, g, cfg);
    }
    const double inv = 1.0 / static_cast<double>(order.size());
    rec.total *= inv;
    rec.parts.mse *= inv;
    rec.parts.lowrank *= inv;
    rec.parts.sharpness *= inv;
    rec.parts.filter_measure *= inv;
    ++state.epoch;
    return rec;
}

struct TrainResult {
    TrainState state;
    std::vector<EpochRecord> history;
};

/// Runs `cfg.epochs` epochs from `state`.
inline TrainResult train(const TrainConfig& cfg, const PatchDataset& data, TrainState state) {
    validate(cfg);
    check_dataset(cfg, data);
    TrainResult out{std::move(state), {}};
    for (std::size_t e = 0; e < cfg.epochs; ++e) out.history.push_back(train_epoch(out.state, cfg, data));
    return out;
}

inline TrainResult train(const TrainConfig& cfg, const PatchDataset& data) {
    validate(cfg);
    return train(cfg, data, init_train_state(cfg));
}

/// Bicubic enlargement followed by the network, clamped to [0, 1]. The
/// priors and filter bank play no part at inference.
inline Image infer(const NetworkParams& theta, const Image& lr_image, std::size_t s) {
    if (s == 0) throw ArgumentError("infer: scale must be positive");
    return clamp01(forward(theta, bicubic_resize(lr_image, static_cast<double>(s))).first);
}

} // namespace dnsp
