#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "image.hpp"

namespace dnsp {

// Binary PGM (P5). 8- and 16-bit files are read and normalized by maxval;
// images are always written as 16-bit (maxval 65535) after clamping to
// [0, 1] and rounding to the nearest level.

namespace detail {

inline std::size_t pgm_header_field(const std::vector<unsigned char>& b, std::size_t& pos) {
    while (pos < b.size()) {
        if (b[pos] == '#') {
            while (pos < b.size() && b[pos] != '\n') ++pos;
        } else if (std::isspace(b[pos])) {
            ++pos;
        } else {
            break;
        }
    }
    if (pos >= b.size() || !std::isdigit(b[pos])) throw FormatError("pgm: malformed header");
    std::size_t v = 0;
    while (pos < b.size() && std::isdigit(b[pos])) {
        v = v * 10 + static_cast<std::size_t>(b[pos] - '0');
        if (v > (1u << 30)) throw FormatError("pgm: header value too large");
        ++pos;
    }
    return v;
}

} // namespace detail

inline Image decode_pgm(const std::vector<unsigned char>& bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') throw FormatError("pgm: not a binary PGM (P5)");
    std::size_t pos = 2;
    const std::size_t width = detail::pgm_header_field(bytes, pos);
    const std::size_t height = detail::pgm_header_field(bytes, pos);
    const std::size_t maxval = detail::pgm_header_field(bytes, pos);
    if (width == 0 || height == 0) throw FormatError("pgm: zero dimension");
    if (maxval == 0 || maxval > 65535) throw FormatError("pgm: maxval out of range");
    if (pos >= bytes.size() || !std::isspace(bytes[pos])) throw FormatError("pgm: malformed header");
    ++pos;
    const std::size_t depth = maxval < 256 ? 1 : 2;
    if (bytes.size() - pos < width * height * depth) throw IoError("pgm: pixel data truncated");
    Image img(height, width);
    const double scale = 1.0 / static_cast<double>(maxval);
    for (std::size_t i = 0; i < width * height; ++i) {
        const std::size_t raw = depth == 1 ? bytes[pos + i]
                                            : (static_cast<std::size_t>(bytes[pos + 2 * i]) << 8) | bytes[pos + 2 * i + 1];
        img.values()[i] = static_cast<double>(std::min(raw, maxval)) * scale;
    }
    return img;
}

inline std::vector<unsigned char> encode_pgm(const Image& img) {
    const std::string header = "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n65535\n";
    std::vector<unsigned char> out(header.begin(), header.end());
    out.reserve(out.size() + 2 * img.size());
    for (double v : img.values()) {
        const auto level = static_cast<std::uint32_t>(std::lround(std::clamp(v, 0.0, 1.0) * 65535.0));
        out.push_back(static_cast<unsigned char>(level >> 8));
        out.push_back(static_cast<unsigned char>(level & 0xffu));
    }
    return out;
}

inline Image read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open image '" + path + "'");
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_pgm(bytes);
}

inline void write_pgm(const std::string& path, const Image& img) {
    const auto bytes = encode_pgm(img);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write image '" + path + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("error writing image '" + path + "'");
}

} // namespace dnsp
