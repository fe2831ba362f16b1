#include "rydsim/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "rydsim/errors.hpp"

namespace rydsim {

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ','))
        out.push_back(field);
    return out;
}

bool parse_field(const std::string& s, double& out) {
    size_t begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos)
        return false;
    size_t end = s.find_last_not_of(" \t\r") + 1;
    const auto [ptr, ec] = std::from_chars(s.data() + begin, s.data() + end, out);
    return ec == std::errc() && ptr == s.data() + end;
}

} // namespace

std::string csv_to_string(const CsvTable& table) {
    std::string out;
    for (size_t i = 0; i < table.header.size(); ++i) {
        out += table.header[i];
        out += (i + 1 < table.header.size()) ? "," : "";
    }
    out += "\n";
    for (const auto& row : table.rows) {
        for (size_t i = 0; i < row.size(); ++i) {
            out += format_double(row[i]);
            out += (i + 1 < row.size()) ? "," : "";
        }
        out += "\n";
    }
    return out;
}

void write_csv(const std::string& path, const CsvTable& table) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write '" + path + "'");
    out << csv_to_string(table);
    if (!out)
        throw IoError("failed while writing '" + path + "'");
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open '" + path + "'");
    CsvTable table;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r")
            continue;
        const auto fields = split_fields(line);
        std::vector<double> row(fields.size());
        bool numeric = true;
        for (size_t i = 0; i < fields.size(); ++i)
            numeric = numeric && parse_field(fields[i], row[i]);
        if (!numeric) {
            if (first) {
                table.header = fields;
                first = false;
                continue;
            }
            throw IoError("non-numeric row in '" + path + "': " + line);
        }
        first = false;
        table.rows.push_back(std::move(row));
    }
    if (table.rows.empty())
        throw IoError("'" + path + "' contains no data rows");
    return table;
}

} // namespace rydsim
