#include <cmath>
#include <cstdio>
#include <fstream>

#include "dce/errors.hpp"
#include "dce/harness.hpp"

namespace dce::harness {

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& columns) {
    if (header.size() != columns.size()) throw std::logic_error("csv: header/column count mismatch");
    const size_t rows = columns.empty() ? 0 : columns[0].size();
    for (const auto& c : columns)
        if (c.size() != rows) throw std::logic_error("csv: ragged columns");

    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    for (size_t j = 0; j < header.size(); ++j) f << (j ? "," : "") << header[j];
    f << '\n';
    for (size_t i = 0; i < rows; ++i) {
        for (size_t j = 0; j < columns.size(); ++j) f << (j ? "," : "") << format_number(columns[j][i]);
        f << '\n';
    }
}

}  // namespace dce::harness
