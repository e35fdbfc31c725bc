// Copyright 2026 The qsl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <fstream>
#include <string>
#include <system_error>
#include <utility>
#include <variant>
#include <vector>

namespace qsl::io {

inline constexpr const char* kCsvSchema = "qsl-csv v1";

/// Shortest round-trip decimal form; "nan", "inf", "-inf" for non-finite values.
inline std::string format_number(double x) {
    if (std::isnan(x)) {
        return "nan";
    }
    if (std::isinf(x)) {
        return x > 0 ? "inf" : "-inf";
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

/// One table cell. monostate renders as an empty field.
using Cell = std::variant<std::monostate, double, std::int64_t, bool, std::string>;

inline std::string format_cell(const Cell& c) {
    struct Visitor {
        std::string operator()(std::monostate) const { return {}; }
        std::string operator()(double x) const { return format_number(x); }
        std::string operator()(std::int64_t x) const { return std::to_string(x); }
        std::string operator()(bool b) const { return b ? "true" : "false"; }
        std::string operator()(const std::string& s) const { return s; }
    };
    return std::visit(Visitor{}, c);
}

/// RFC 4180 quoting: fields holding a comma, quote or line break are quoted,
/// inner quotes doubled.
inline std::string quote_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') {
            out += '"';
        }
        out += ch;
    }
    out += '"';
    return out;
}

struct Table {
    std::string kind;  // recorded in the schema line
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add(std::vector<Cell> row) {
        if (row.size() != columns.size()) {
            throw std::logic_error("Table::add: row width " + std::to_string(row.size()) +
                                   " for " + std::to_string(columns.size()) + " columns");
        }
        rows.push_back(std::move(row));
    }
};

/// "# qsl-csv v1 <kind>", a header row, then one line per row ("\n" endings).
inline std::string to_csv(const Table& t) {
    std::string out = std::string("# ") + kCsvSchema + " " + t.kind + "\n";
    auto line = [&out](const auto& fields, auto fmt) {
        for (std::size_t k = 0; k < fields.size(); ++k) {
            if (k > 0) {
                out += ',';
            }
            out += quote_field(fmt(fields[k]));
        }
        out += '\n';
    };
    line(t.columns, [](const std::string& s) { return s; });
    for (const auto& row : t.rows) {
        line(row, [](const Cell& c) { return format_cell(c); });
    }
    return out;
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw std::system_error(errno, std::generic_category(), "cannot open " + path);
    }
    f << content;
    if (!f) {
        throw std::system_error(errno, std::generic_category(), "cannot write " + path);
    }
}

} // namespace qsl::io
