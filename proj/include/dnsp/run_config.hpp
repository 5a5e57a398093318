#pragma once

#include <charconv>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "train.hpp"

namespace dnsp {

// Flat "key = value" text: one entry per line, '#' starts a comment,
// whitespace around keys and values is ignored. `layer` may repeat; every
// other key appears at most once.

using KeyValues = std::vector<std::pair<std::string, std::string>>;

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) out.push_back(trim(item));
    return out;
}

} // namespace detail

inline KeyValues parse_key_values(const std::string& text) {
    KeyValues out;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string body = detail::trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
        std::string key = detail::trim(std::string_view(body).substr(0, eq));
        std::string value = detail::trim(std::string_view(body).substr(eq + 1));
        if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        if (key != "layer")
            for (const auto& kv : out)
                if (kv.first == key) throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        out.emplace_back(std::move(key), std::move(value));
    }
    return out;
}

/// Shortest decimal text that parses back to the same double.
inline std::string format_real(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline double parse_real(const std::string& key, const std::string& s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ConfigError("'" + key + "': not a number: '" + s + "'");
    return v;
}

inline std::uint64_t parse_unsigned(const std::string& key, const std::string& s) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw ConfigError("'" + key + "': not a non-negative integer: '" + s + "'");
    return v;
}

inline bool parse_bool(const std::string& key, const std::string& s) {
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw ConfigError("'" + key + "': expected true or false");
}

inline std::vector<std::size_t> parse_index_list(const std::string& key, const std::string& s) {
    std::vector<std::size_t> out;
    if (detail::trim(s).empty()) return out;
    for (const auto& item : detail::split(s, ',')) out.push_back(parse_unsigned(key, item));
    return out;
}

inline LayerSpec parse_layer(const std::string& s) {
    const auto f = detail::split(s, ',');
    if (f.size() != 5) throw ConfigError("'layer': expected kernel_h, kernel_w, in, out, activation");
    try {
        return {parse_unsigned("layer", f[0]), parse_unsigned("layer", f[1]), parse_unsigned("layer", f[2]),
                parse_unsigned("layer", f[3]), activation_from_string(f[4])};
    } catch (const ArgumentError& e) {
        throw ConfigError(e.what());
    }
}

inline std::string format_layer(const LayerSpec& s) {
    return std::to_string(s.kernel_h) + "," + std::to_string(s.kernel_w) + "," + std::to_string(s.in_channels) +
           "," + std::to_string(s.out_channels) + "," + to_string(s.activation);
}

/// Applies one TrainConfig key. Returns false for keys it does not know.
/// The first `layer` key replaces the default architecture.
inline bool apply_train_key(TrainConfig& cfg, const std::string& key, const std::string& value, bool& saw_layer) {
    try {
        if (key == "scale") cfg.scale = parse_unsigned(key, value);
        else if (key == "blur_sigma") cfg.blur_sigma = parse_real(key, value);
        else if (key == "patch_size") cfg.patch_size = parse_unsigned(key, value);
        else if (key == "stride") cfg.stride = parse_unsigned(key, value);
        else if (key == "batch_size") cfg.batch_size = parse_unsigned(key, value);
        else if (key == "epochs") cfg.epochs = parse_unsigned(key, value);
        else if (key == "learning_rate") cfg.learning_rate = parse_real(key, value);
        else if (key == "optimizer") cfg.optimizer = optimizer_from_string(value);
        else if (key == "alpha") cfg.loss.alpha = parse_real(key, value);
        else if (key == "beta") cfg.loss.beta = parse_real(key, value);
        else if (key == "gamma") cfg.loss.gamma = parse_real(key, value);
        else if (key == "delta") cfg.loss.delta = parse_real(key, value);
        else if (key == "prior_padding") cfg.loss.prior_padding = padding_from_string(value);
        else if (key == "n_sharp_filters") cfg.n_sharp_filters = parse_unsigned(key, value);
        else if (key == "seed") cfg.seed = parse_unsigned(key, value);
        else if (key == "init") cfg.init = init_scheme_from_string(value);
        else if (key == "learn_filters") cfg.learn_filters = parse_bool(key, value);
        else if (key == "exclude") cfg.exclusions = parse_index_list(key, value);
        else if (key == "layer") {
            if (!saw_layer) cfg.architecture.clear();
            saw_layer = true;
            cfg.architecture.push_back(parse_layer(value));
        } else
            return false;
    } catch (const ArgumentError& e) {
        throw ConfigError("'" + key + "': " + e.what());
    }
    return true;
}

/// Every TrainConfig field as key = value lines, in a fixed order.
inline std::string format_train_config(const TrainConfig& cfg) {
    std::ostringstream out;
    out << "scale = " << cfg.scale << '\n'
        << "blur_sigma = " << format_real(cfg.blur_sigma) << '\n'
        << "patch_size = " << cfg.patch_size << '\n'
        << "stride = " << cfg.stride << '\n'
        << "batch_size = " << cfg.batch_size << '\n'
        << "epochs = " << cfg.epochs << '\n'
        << "learning_rate = " << format_real(cfg.learning_rate) << '\n'
        << "optimizer = " << to_string(cfg.optimizer) << '\n'
        << "alpha = " << format_real(cfg.loss.alpha) << '\n'
        << "beta = " << format_real(cfg.loss.beta) << '\n'
        << "gamma = " << format_real(cfg.loss.gamma) << '\n'
        << "delta = " << format_real(cfg.loss.delta) << '\n'
        << "prior_padding = " << to_string(cfg.loss.prior_padding) << '\n'
        << "n_sharp_filters = " << cfg.n_sharp_filters << '\n'
        << "seed = " << cfg.seed << '\n'
        << "init = " << to_string(cfg.init) << '\n'
        << "learn_filters = " << (cfg.learn_filters ? "true" : "false") << '\n';
    out << "exclude = ";
    for (std::size_t i = 0; i < cfg.exclusions.size(); ++i) out << (i ? "," : "") << cfg.exclusions[i];
    out << '\n';
    for (const auto& l : cfg.architecture) out << "layer = " << format_layer(l) << '\n';
    return out.str();
}

/// A run description: the training configuration plus dataset location.
struct RunConfig {
    TrainConfig train;
    std::string data_dir;
};

inline RunConfig parse_run_config(const std::string& text) {
    RunConfig rc;
    bool saw_layer = false;
    for (const auto& [key, value] : parse_key_values(text)) {
        if (key == "data") {
            rc.data_dir = value;
            continue;
        }
        if (!apply_train_key(rc.train, key, value, saw_layer)) throw ConfigError("unknown key '" + key + "'");
    }
    validate(rc.train);
    return rc;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config '" + path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_run_config(text.str());
}

} // namespace dnsp
