#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "run_config.hpp"
#include "train.hpp"

namespace dnsp {

// Binary layout (all integers and reals little-endian; see docs/checkpoint_format.md):
//   "DNSP" | u32 version | u64 header_len | header (key = value text)
//   | f64 theta[theta_count] | f64 bank[bank_count]
//   | f64 theta_m[theta_count] | f64 theta_v[theta_count]
//   | f64 bank_m[bank_count]   | f64 bank_v[bank_count]

inline constexpr std::array<char, 4> checkpoint_magic{'D', 'N', 'S', 'P'};
inline constexpr std::uint32_t checkpoint_version = 1;

struct Checkpoint {
    TrainConfig config;
    TrainState state;

    friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

namespace detail {

class ByteWriter {
  public:
    void raw(const char* p, std::size_t n) { bytes_.insert(bytes_.end(), p, p + n); }
    void u32(std::uint32_t v) { little_endian(v, 4); }
    void u64(std::uint64_t v) { little_endian(v, 8); }
    void f64(std::span<const double> v) {
        for (double d : v) u64(std::bit_cast<std::uint64_t>(d));
    }
    const std::vector<char>& bytes() const { return bytes_; }

  private:
    void little_endian(std::uint64_t v, int n) {
        for (int i = 0; i < n; ++i) bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
    }
    std::vector<char> bytes_;
};

class ByteReader {
  public:
    explicit ByteReader(std::vector<char> bytes) : bytes_(std::move(bytes)) {}

    void raw(char* p, std::size_t n) {
        need(n);
        std::memcpy(p, bytes_.data() + pos_, n);
        pos_ += n;
    }
    std::uint32_t u32() { return static_cast<std::uint32_t>(little_endian(4)); }
    std::uint64_t u64() { return little_endian(8); }
    void f64(std::span<double> out) {
        need(8 * out.size());
        for (double& d : out) d = std::bit_cast<double>(little_endian(8));
    }
    std::size_t remaining() const { return bytes_.size() - pos_; }

  private:
    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n) throw IoError("checkpoint: file is truncated");
    }
    std::uint64_t little_endian(int n) {
        need(static_cast<std::size_t>(n));
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + static_cast<std::size_t>(i)]))
                 << (8 * i);
        pos_ += static_cast<std::size_t>(n);
        return v;
    }
    std::vector<char> bytes_;
    std::size_t pos_ = 0;
};

} // namespace detail

inline std::vector<char> encode_checkpoint(const Checkpoint& ck) {
    const auto& st = ck.state;
    if (!(st.theta.architecture() == ck.config.architecture))
        throw ConsistencyError("checkpoint: network architecture differs from config");
    std::string header = format_train_config(ck.config);
    header += "epoch = " + std::to_string(st.epoch) + "\n";
    header += "bank_filters = " + std::to_string(st.bank.size()) + "\n";
    header += "theta_count = " + std::to_string(st.theta.parameter_count()) + "\n";
    header += "theta_adam_step = " + std::to_string(st.theta_adam.step) + "\n";
    header += "bank_adam_step = " + std::to_string(st.bank_adam.step) + "\n";

    const std::size_t nt = st.theta.parameter_count();
    const std::size_t nb = 9 * st.bank.size();
    if (st.theta_adam.m.size() != nt || st.theta_adam.v.size() != nt || st.bank_adam.m.size() != nb ||
        st.bank_adam.v.size() != nb)
        throw ConsistencyError("checkpoint: optimizer state does not match parameters");

    detail::ByteWriter w;
    w.raw(checkpoint_magic.data(), checkpoint_magic.size());
    w.u32(checkpoint_version);
    w.u64(header.size());
    w.raw(header.data(), header.size());
    w.f64(st.theta.values());
    w.f64(st.bank.flatten());
    w.f64(st.theta_adam.m);
    w.f64(st.theta_adam.v);
    w.f64(st.bank_adam.m);
    w.f64(st.bank_adam.v);
    return w.bytes();
}

inline Checkpoint decode_checkpoint(std::vector<char> bytes) {
    detail::ByteReader r(std::move(bytes));
    std::array<char, 4> magic{};
    r.raw(magic.data(), magic.size());
    if (magic != checkpoint_magic) throw FormatError("checkpoint: bad magic bytes");
    const std::uint32_t version = r.u32();
    if (version != checkpoint_version)
        throw VersionError("checkpoint: unsupported version " + std::to_string(version) + " (expected " +
                           std::to_string(checkpoint_version) + ")");
    const std::uint64_t header_len = r.u64();
    if (header_len > r.remaining()) throw IoError("checkpoint: file is truncated");
    std::string header(header_len, '\0');
    r.raw(header.data(), header.size());

    Checkpoint ck;
    std::uint64_t n_filters = 0, theta_count = 0;
    bool saw_layer = false;
    bool have_filters = false, have_count = false;
    try {
        for (const auto& [key, value] : parse_key_values(header)) {
            if (apply_train_key(ck.config, key, value, saw_layer)) continue;
            if (key == "epoch") ck.state.epoch = parse_unsigned(key, value);
            else if (key == "bank_filters") {
                n_filters = parse_unsigned(key, value);
                have_filters = true;
            } else if (key == "theta_count") {
                theta_count = parse_unsigned(key, value);
                have_count = true;
            }
            else if (key == "theta_adam_step") ck.state.theta_adam.step = parse_unsigned(key, value);
            else if (key == "bank_adam_step") ck.state.bank_adam.step = parse_unsigned(key, value);
            else throw FormatError("checkpoint: unknown header key '" + key + "'");
        }
        if (!have_filters || !have_count || !saw_layer) throw FormatError("checkpoint: incomplete header");
        ck.state.theta = NetworkParams(ck.config.architecture);
    } catch (const ConfigError& e) {
        throw FormatError(std::string("checkpoint header: ") + e.what());
    } catch (const ArgumentError& e) {
        throw FormatError(std::string("checkpoint header: ") + e.what());
    }
    if (ck.state.theta.parameter_count() != theta_count)
        throw FormatError("checkpoint: parameter count does not match architecture");

    const std::size_t nb = 9 * n_filters;
    if (8 * (3 * theta_count + 3 * nb) > r.remaining()) throw IoError("checkpoint: file is truncated");
    r.f64(ck.state.theta.values());
    std::vector<double> coeffs(nb);
    r.f64(coeffs);
    ck.state.bank = SharpnessFilterBank(std::vector<Kernel2D>(n_filters, Kernel2D(3, 3)));
    ck.state.bank.assign(coeffs);
    ck.state.theta_adam.m.resize(theta_count);
    ck.state.theta_adam.v.resize(theta_count);
    ck.state.bank_adam.m.resize(nb);
    ck.state.bank_adam.v.resize(nb);
    r.f64(ck.state.theta_adam.m);
    r.f64(ck.state.theta_adam.v);
    r.f64(ck.state.bank_adam.m);
    r.f64(ck.state.bank_adam.v);
    if (r.remaining() != 0) throw FormatError("checkpoint: trailing bytes after parameter arrays");
    return ck;
}

inline void save_checkpoint(const std::string& path, const Checkpoint& ck) {
    const auto bytes = encode_checkpoint(ck);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write checkpoint '" + path + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("error writing checkpoint '" + path + "'");
}

inline Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint '" + path + "'");
    std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_checkpoint(std::move(bytes));
}

} // namespace dnsp
