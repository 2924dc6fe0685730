#include "oscmon/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace oscmon {

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string csv_line(const OutputRow& r) {
    std::string line = format_g17(r.t_s);
    for (double v : {r.mean_x, r.mean_p, r.a11, r.a12, r.a22, r.power_frac, r.n_eff}) {
        line += ',';
        line += format_g17(v);
    }
    return line;
}

void write_csv(const std::string& path, const std::vector<OutputRow>& rows) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_csv: cannot open " + path);
    out << kCsvHeader << '\n';
    for (const auto& r : rows) out << csv_line(r) << '\n';
    if (!out) throw std::runtime_error("write_csv: write failed for " + path);
}

std::vector<OutputRow> read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader)
        throw std::runtime_error("read_csv: bad header in " + path);

    std::vector<OutputRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        OutputRow r;
        char comma;
        if (!(ss >> r.t_s >> comma >> r.mean_x >> comma >> r.mean_p >> comma >>
              r.a11 >> comma >> r.a12 >> comma >> r.a22 >> comma >>
              r.power_frac >> comma >> r.n_eff))
            throw std::runtime_error("read_csv: malformed row in " + path);
        rows.push_back(r);
    }
    return rows;
}

}  // namespace oscmon
