#pragma once

#include <string>
#include <vector>

namespace mstlogit::csv {

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    // 1-based line number of each row in the source file, for error messages
    std::vector<long> lines;

    int column(const std::string& name) const;  // -1 if absent
};

/// Reads a comma-separated file with a mandatory header row. No quoting;
/// fields may not contain commas. Blank lines are skipped.
Table read_file(const std::string& path);

/// Writes rows as-is; caller is responsible for canonical field formatting.
void write_file(const std::string& path, const Table& table);

std::vector<std::string> split(const std::string& line, char sep = ',');

double parse_double(const std::string& field, const std::string& name, long line);
long parse_long(const std::string& field, const std::string& name, long line);

}  // namespace mstlogit::csv
