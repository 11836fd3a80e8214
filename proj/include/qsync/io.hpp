// io.hpp -- Dataset serialization: CSV (17 significant digits, LF, header
// row), JSON tables and atomic whole-file writes.

#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <span>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "qsync/error.hpp"

namespace qsync {

inline constexpr const char* artifact_version = "0.1.0";
inline constexpr const char* metadata_schema = "qsync-metadata-v1";

/// Column-oriented numeric table.
struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    void add(std::initializer_list<double> row) { rows.emplace_back(row); }
};

inline void append_number(std::string& out, double x) {
    char buf[40];
    const int n = std::snprintf(buf, sizeof buf, "%.17g", x);
    out.append(buf, static_cast<std::size_t>(n));
}

inline std::string to_csv(const Table& t) {
    std::string out;
    out.reserve(t.rows.size() * 24 * std::max<std::size_t>(t.columns.size(), 1) + 64);
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
        if (c) out += ',';
        out += t.columns[c];
    }
    out += '\n';
    for (const auto& row : t.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out += ',';
            append_number(out, row[c]);
        }
        out += '\n';
    }
    return out;
}

inline nlohmann::json to_json(const Table& t) {
    nlohmann::json j;
    j["columns"] = t.columns;
    j["rows"] = t.rows;
    return j;
}

/// Writes `content` to a sibling temporary file and renames it over `path`.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw InvalidInput("cannot write " + tmp.string());
        f.write(content.data(), static_cast<std::streamsize>(content.size()));
        f.flush();
        if (!f) throw InvalidInput("write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw InvalidInput("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

inline void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
    write_file_atomic(path, j.dump(2) + "\n");
}

/// Writes a table as `<stem>.csv` or `<stem>.json`; returns the file name.
inline std::string write_table(const std::filesystem::path& dir, const std::string& stem, const Table& t,
                               const std::string& format) {
    if (format == "json") {
        const std::string name = stem + ".json";
        write_json(dir / name, to_json(t));
        return name;
    }
    const std::string name = stem + ".csv";
    write_file_atomic(dir / name, to_csv(t));
    return name;
}

/// Creates `dir` if needed and checks that files can be created in it.
inline void ensure_writable_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw InvalidInput("cannot create output directory " + dir.string() + ": " + ec.message());
    const auto probe = dir / ".qsync-write-probe";
    {
        std::ofstream f(probe);
        if (!f) throw InvalidInput("output directory is not writable: " + dir.string());
    }
    std::filesystem::remove(probe, ec);
}

} // namespace qsync
