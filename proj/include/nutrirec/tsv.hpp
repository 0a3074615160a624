#pragma once

// Minimal tab-separated reader used by every bundled data file: first
// non-comment line is the header, '#' starts a comment line, list-valued
// cells use '|' between entries.

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "nutrirec/error.hpp"

namespace nutrirec::tsv {

/// Malformed table; `line` is 0 when the problem is not tied to one line.
class ParseError : public LoadError {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& detail)
        : LoadError(source + (line ? ":" + std::to_string(line) : std::string()) + ": " + detail),
          line_(line),
          detail_(detail) {}

    std::size_t line() const noexcept { return line_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    std::size_t line_;
    std::string detail_;
};

struct Row {
    std::size_t line = 0;
    std::vector<std::string> cells;
};

struct Table {
    std::vector<std::string> header;
    std::vector<Row> rows;
};

inline std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

inline std::vector<std::string> split(std::string_view line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.emplace_back(line.substr(start));
            break;
        }
        out.emplace_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

/// '|'-separated list; empty cell is the empty list, entries are trimmed.
inline std::vector<std::string> split_list(std::string_view cell) {
    std::vector<std::string> out;
    if (trim(cell).empty()) return out;
    for (auto& part : split(cell, '|')) {
        auto t = trim(part);
        if (!t.empty()) out.push_back(std::move(t));
    }
    return out;
}

inline std::string join_list(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out.push_back('|');
        out += items[i];
    }
    return out;
}

/// Reads the whole table. Throws ParseError when the header differs from
/// `expected_header` (if given) or a row has the wrong number of cells.
inline Table read(std::istream& in, const std::string& source,
                  const std::vector<std::string>& expected_header = {}) {
    Table t;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty() || line.front() == '#') continue;
        auto cells = split(line, '\t');
        if (!have_header) {
            for (auto& c : cells) c = trim(c);
            if (!expected_header.empty() && cells != expected_header) {
                std::string want;
                for (const auto& h : expected_header) want += (want.empty() ? "" : ",") + h;
                throw ParseError(source, line_no, "unexpected header, expected columns " + want);
            }
            t.header = std::move(cells);
            have_header = true;
            continue;
        }
        if (cells.size() != t.header.size())
            throw ParseError(source, line_no,
                             "expected " + std::to_string(t.header.size()) + " columns, got " + std::to_string(cells.size()));
        t.rows.push_back({line_no, std::move(cells)});
    }
    if (!have_header) throw ParseError(source, 0, "missing header row");
    return t;
}

inline Table read_file(const std::string& path, const std::vector<std::string>& expected_header = {}) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot open " + path);
    return read(in, path, expected_header);
}

}  // namespace nutrirec::tsv
