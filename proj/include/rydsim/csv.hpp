#pragma once

#include <string>
#include <vector>

namespace rydsim {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

/// UTF-8, comma-separated, header row, floats with 17 significant digits.
void write_csv(const std::string& path, const CsvTable& table);
std::string csv_to_string(const CsvTable& table);

/// Reads a two- or three-column numeric CSV (x, y[, y_err]); a non-numeric
/// first row is treated as a header.
CsvTable read_csv(const std::string& path);

} // namespace rydsim
