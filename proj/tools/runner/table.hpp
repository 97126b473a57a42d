#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace darksearch::runner {

inline constexpr const char* kUnits = "times in 1/Gamma, frequencies and rates in Gamma";

/// Numeric table written as CSV (with `#` metadata lines) and/or JSON.
struct Table {
    std::vector<std::pair<std::string, std::string>> meta;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    void add_meta(std::string key, std::string value) { meta.emplace_back(std::move(key), std::move(value)); }
    void add_row(std::vector<double> row);
    [[nodiscard]] std::size_t column(const std::string& name) const;
};

/// Shortest representation that round-trips.
[[nodiscard]] std::string format_double(double x);

/// Writes <dir>/<stem>.csv and/or <dir>/<stem>.json per `formats`; returns the paths written.
std::vector<std::filesystem::path> write_table(const std::filesystem::path& dir, const std::string& stem,
                                               const Table& table, const std::vector<std::string>& formats);
[[nodiscard]] Table read_csv_table(const std::filesystem::path& path);
/// Reads <stem>.csv, falling back to <stem>.json.
[[nodiscard]] Table read_table(const std::filesystem::path& dir, const std::string& stem);

void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& j);
[[nodiscard]] nlohmann::json read_json(const std::filesystem::path& path);

void ensure_directory(const std::filesystem::path& dir);

}  // namespace darksearch::runner
