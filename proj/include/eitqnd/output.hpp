// Data-file writers: CSV with shortest round-trip decimals, plus a JSON
// mirror of the same tables.
#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "eitqnd/errors.hpp"

namespace eitqnd {

/// Shortest decimal string that round-trips to the same double.
inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

/// Row-major numeric table with named columns.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    void validate() const {
        for (const auto& r : rows)
            if (r.size() != columns.size())
                throw DimensionError("table row width does not match column count");
    }
};

inline std::string table_to_csv(const Table& t) {
    t.validate();
    std::string out;
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
        if (c > 0)
            out += ',';
        out += t.columns[c];
    }
    out += '\n';
    for (const auto& row : t.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c > 0)
                out += ',';
            out += format_double(row[c]);
        }
        out += '\n';
    }
    return out;
}

inline nlohmann::json table_to_json(const Table& t) {
    t.validate();
    nlohmann::json data = nlohmann::json::object();
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
        nlohmann::json col = nlohmann::json::array();
        for (const auto& row : t.rows)
            col.push_back(row[c]);
        data[t.columns[c]] = std::move(col);
    }
    return nlohmann::json{{"columns", t.columns}, {"data", std::move(data)}};
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw Error("cannot open output file " + path.string());
    f << text;
    if (!f)
        throw Error("failed writing " + path.string());
}

enum class OutputFormat { Csv, Json };

inline std::string format_name(OutputFormat f) {
    return f == OutputFormat::Csv ? "csv" : "json";
}

/// Write a table as <stem>.csv or <stem>.json depending on format; returns
/// the path written.
inline std::filesystem::path write_table(const std::filesystem::path& dir,
                                         const std::string& stem, const Table& t,
                                         OutputFormat format) {
    const std::filesystem::path path =
        dir / (stem + (format == OutputFormat::Csv ? ".csv" : ".json"));
    if (format == OutputFormat::Csv)
        write_text_file(path, table_to_csv(t));
    else
        write_text_file(path, table_to_json(t).dump(2) + "\n");
    return path;
}

} // namespace eitqnd
