#pragma once

#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "run_config.hpp"
#include "studies.hpp"
#include "train.hpp"

namespace dnsp {

/// CSV cell for a real: shortest round-trip decimal, "inf"/"-inf"/"nan"
/// for non-finite values.
inline std::string csv_real(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return format_real(v);
}

inline std::string study_csv(const std::vector<StudyRow>& rows) {
    std::string out = "parameter,value\n";
    for (const auto& r : rows) out += csv_real(r.parameter) + "," + csv_real(r.value) + "\n";
    return out;
}

inline std::string history_csv(const std::vector<EpochRecord>& history) {
    std::string out = "epoch,total,mse,lowrank,sharpness,filter_measure\n";
    for (const auto& r : history)
        out += std::to_string(r.epoch) + "," + csv_real(r.total) + "," + csv_real(r.parts.mse) + "," +
               csv_real(r.parts.lowrank) + "," + csv_real(r.parts.sharpness) + "," +
               csv_real(r.parts.filter_measure) + "\n";
    return out;
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << text;
    if (!out) throw IoError("error writing '" + path + "'");
}

} // namespace dnsp
