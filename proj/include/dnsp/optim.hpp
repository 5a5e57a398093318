#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"

namespace dnsp {

enum class OptimizerKind { SGD, Adam };

inline const char* to_string(OptimizerKind k) { return k == OptimizerKind::SGD ? "sgd" : "adam"; }

inline OptimizerKind optimizer_from_string(const std::string& s) {
    if (s == "sgd") return OptimizerKind::SGD;
    if (s == "adam") return OptimizerKind::Adam;
    throw ArgumentError("unknown optimizer '" + s + "'");
}

namespace detail {
inline void check_sizes(std::size_t a, std::size_t b, const char* who) {
    if (a != b) throw DimensionError(std::string(who) + ": parameter/gradient size mismatch");
}
} // namespace detail

/// theta <- theta - lr * grad.
inline void sgd_step(std::span<double> params, std::span<const double> grads, double lr) {
    detail::check_sizes(params.size(), grads.size(), "sgd_step");
    for (std::size_t i = 0; i < params.size(); ++i) params[i] -= lr * grads[i];
}

struct AdamState {
    static constexpr double beta1 = 0.9;
    static constexpr double beta2 = 0.999;
    static constexpr double epsilon = 1e-8;

    std::vector<double> m;
    std::vector<double> v;
    std::uint64_t step = 0;

    AdamState() = default;
    explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}

    friend bool operator==(const AdamState&, const AdamState&) = default;
};

/// One bias-corrected Adam update.
inline void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state, double lr) {
    detail::check_sizes(params.size(), grads.size(), "adam_step");
    detail::check_sizes(params.size(), state.m.size(), "adam_step");
    detail::check_sizes(params.size(), state.v.size(), "adam_step");
    ++state.step;
    const double t = static_cast<double>(state.step);
    const double c1 = 1.0 - std::pow(AdamState::beta1, t);
    const double c2 = 1.0 - std::pow(AdamState::beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        state.m[i] = AdamState::beta1 * state.m[i] + (1.0 - AdamState::beta1) * g;
        state.v[i] = AdamState::beta2 * state.v[i] + (1.0 - AdamState::beta2) * g * g;
        const double m_hat = state.m[i] / c1;
        const double v_hat = state.v[i] / c2;
        params[i] -= lr * m_hat / (std::sqrt(v_hat) + AdamState::epsilon);
    }
}

} // namespace dnsp
