#include "rtfs/cli/csv.hpp"

#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "rtfs/core.hpp"

namespace rtfs::cli {

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

CsvCell parse_cell(const std::string& s, std::size_t row) {
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw ConfigError("csv: cannot parse '" + s + "' on line " + std::to_string(row + 2));
    }
    return v;
}

}  // namespace

std::string format_full(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_csv(std::ostream& os, const CsvTable& t) {
    for (std::size_t j = 0; j < t.header.size(); ++j) os << (j ? "," : "") << t.header[j];
    os << '\n';
    for (const auto& row : t.rows) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j) os << ',';
            if (row[j]) os << format_full(*row[j]);
        }
        os << '\n';
    }
}

std::string to_csv(const CsvTable& t) {
    std::ostringstream os;
    write_csv(os, t);
    return os.str();
}

CsvTable parse_csv(std::istream& is) {
    CsvTable t;
    std::string line;
    if (!std::getline(is, line)) throw ConfigError("csv: missing header row");
    t.header = split(line);
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != t.header.size()) {
            throw ConfigError("csv: row " + std::to_string(t.rows.size() + 1) + " has " +
                              std::to_string(cells.size()) + " cells, header has " +
                              std::to_string(t.header.size()));
        }
        std::vector<CsvCell> row;
        row.reserve(cells.size());
        for (const auto& c : cells) row.push_back(parse_cell(c, t.rows.size()));
        t.rows.push_back(std::move(row));
    }
    return t;
}

CsvTable parse_csv(const std::string& text) {
    std::istringstream is(text);
    return parse_csv(is);
}

}  // namespace rtfs::cli
