#pragma once

// Minimal numeric CSV: header row, comma-delimited, LF line endings, 17
// significant digits. Empty cells stand for values that were not computed.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace rtfs::cli {

using CsvCell = std::optional<double>;

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<CsvCell>> rows;

    bool operator==(const CsvTable&) const = default;
};

std::string format_full(double x);

void write_csv(std::ostream& os, const CsvTable& t);
std::string to_csv(const CsvTable& t);

/// Throws ConfigError on ragged rows or unparsable cells.
CsvTable parse_csv(std::istream& is);
CsvTable parse_csv(const std::string& text);

}  // namespace rtfs::cli
