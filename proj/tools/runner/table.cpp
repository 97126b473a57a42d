#include "table.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "config.hpp"

namespace darksearch::runner {

namespace fs = std::filesystem;

void Table::add_row(std::vector<double> row) {
    if (row.size() != columns.size())
        throw std::logic_error("table row has " + std::to_string(row.size()) + " cells, expected " +
                               std::to_string(columns.size()));
    rows.push_back(std::move(row));
}

std::size_t Table::column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return i;
    throw MissingArtifacts("table has no column '" + name + "'");
}

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    const auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

namespace {

double parse_double(const std::string& s, const fs::path& path) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size())
        throw IoError(path.string() + ": malformed number '" + s + "'");
    return v;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

void check_written(std::ofstream& out, const fs::path& path) {
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

void ensure_directory(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

std::vector<fs::path> write_table(const fs::path& dir, const std::string& stem, const Table& table,
                                  const std::vector<std::string>& formats) {
    ensure_directory(dir);
    std::vector<fs::path> written;
    for (const auto& f : formats) {
        if (f == "csv") {
            const fs::path path = dir / (stem + ".csv");
            auto out = open_out(path);
            out << "# units: " << kUnits << '\n';
            for (const auto& [k, v] : table.meta) out << "# " << k << ": " << v << '\n';
            for (std::size_t i = 0; i < table.columns.size(); ++i) out << (i ? "," : "") << table.columns[i];
            out << '\n';
            for (const auto& row : table.rows) {
                for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_double(row[i]);
                out << '\n';
            }
            check_written(out, path);
            written.push_back(path);
        } else if (f == "json") {
            nlohmann::ordered_json j;
            j["units"] = kUnits;
            nlohmann::ordered_json meta = nlohmann::ordered_json::object();
            for (const auto& [k, v] : table.meta) meta[k] = v;
            j["meta"] = meta;
            j["columns"] = table.columns;
            nlohmann::ordered_json rows = nlohmann::ordered_json::array();
            for (const auto& row : table.rows) {
                nlohmann::ordered_json r = nlohmann::ordered_json::array();
                for (const double x : row) {
                    if (std::isfinite(x))
                        r.push_back(x);
                    else
                        r.push_back(nullptr);
                }
                rows.push_back(std::move(r));
            }
            j["rows"] = std::move(rows);
            const fs::path path = dir / (stem + ".json");
            write_json(path, j);
            written.push_back(path);
        }
    }
    return written;
}

Table read_csv_table(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingArtifacts("missing artifact " + path.string());
    Table t;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.front() == '#') {
            const auto colon = line.find(": ");
            if (colon != std::string::npos && line.rfind("# units", 0) != 0)
                t.add_meta(line.substr(2, colon - 2), line.substr(colon + 2));
            continue;
        }
        const auto cells = split(line);
        if (!have_header) {
            t.columns = cells;
            have_header = true;
            continue;
        }
        if (cells.size() != t.columns.size()) throw IoError(path.string() + ": ragged row");
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& c : cells) row.push_back(parse_double(c, path));
        t.rows.push_back(std::move(row));
    }
    if (!have_header) throw IoError(path.string() + ": no header row");
    return t;
}

Table read_table(const fs::path& dir, const std::string& stem) {
    const fs::path csv = dir / (stem + ".csv");
    if (fs::exists(csv)) return read_csv_table(csv);
    const fs::path js = dir / (stem + ".json");
    if (!fs::exists(js)) throw MissingArtifacts("missing artifact " + csv.string() + " (or .json)");
    const nlohmann::json j = read_json(js);
    Table t;
    try {
        for (const auto& [k, v] : j.at("meta").items()) t.add_meta(k, v.get<std::string>());
        t.columns = j.at("columns").get<std::vector<std::string>>();
        for (const auto& r : j.at("rows")) {
            std::vector<double> row;
            for (const auto& x : r) row.push_back(x.is_null() ? std::numeric_limits<double>::quiet_NaN() : x.get<double>());
            t.rows.push_back(std::move(row));
        }
    } catch (const nlohmann::json::exception& e) {
        throw IoError(js.string() + ": " + e.what());
    }
    return t;
}

void write_json(const fs::path& path, const nlohmann::ordered_json& j) {
    if (path.has_parent_path()) ensure_directory(path.parent_path());
    auto out = open_out(path);
    out << j.dump(2) << '\n';
    check_written(out, path);
}

nlohmann::json read_json(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingArtifacts("missing artifact " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

}  // namespace darksearch::runner
