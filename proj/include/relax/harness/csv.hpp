#pragma once

// CSV tables with a '#'-prefixed metadata block. Doubles are written with 17
// significant digits so values round-trip exactly.

#include "relax/error.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace relax::harness {

using Cell = std::variant<double, long long, std::string>;

inline std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string format_cell(const Cell& c) {
    if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
    if (const auto* i = std::get_if<long long>(&c)) return std::to_string(*i);
    const auto& s = std::get<std::string>(c);
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) {
        if (ch == '"') q += '"';
        q += ch;
    }
    return q + "\"";
}

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

    void meta(const std::string& key, const std::string& value) { meta_.emplace_back(key, value); }

    void row(std::vector<Cell> cells) {
        if (cells.size() != columns_.size())
            throw Error(ErrorKind::InvalidArgument, "row has " + std::to_string(cells.size()) + " cells, table has " +
                                                        std::to_string(columns_.size()) + " columns");
        rows_.push_back(std::move(cells));
    }

    std::size_t size() const { return rows_.size(); }
    const std::vector<std::vector<Cell>>& rows() const { return rows_; }

    std::string str() const {
        std::string out;
        for (const auto& [k, v] : meta_) out += "# " + k + ": " + v + "\n";
        for (std::size_t i = 0; i < columns_.size(); ++i) out += (i ? "," : "") + columns_[i];
        out += "\n";
        for (const auto& r : rows_) {
            for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + format_cell(r[i]);
            out += "\n";
        }
        return out;
    }

    void write(const std::filesystem::path& path) const {
        std::error_code ec;
        if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
        out << str();
        if (!out) throw Error(ErrorKind::Io, "short write to " + path.string());
    }

private:
    std::vector<std::string> columns_;
    std::vector<std::pair<std::string, std::string>> meta_;
    std::vector<std::vector<Cell>> rows_;
};

}  // namespace relax::harness
