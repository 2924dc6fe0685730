#pragma once

#include <string>
#include <vector>

#include "oscmon/trajectory_engine.hpp"

namespace oscmon {

inline constexpr const char* kCsvHeader =
    "t_s,mean_x,mean_p,a11,a12,a22,power_frac,n_eff";

/// Serializes one double with 17 significant digits (lossless round-trip).
std::string format_g17(double v);

/// Writes rows under the fixed header; output is bit-exact reproducible for
/// identical inputs.
void write_csv(const std::string& path, const std::vector<OutputRow>& rows);

std::string csv_line(const OutputRow& row);

/// Reads a file produced by write_csv.  Throws on malformed input.
std::vector<OutputRow> read_csv(const std::string& path);

}  // namespace oscmon
