#pragma once

// Flat-file formats: CSV with one header row and %.17g numbers, the filter
// model record, and key = value configuration files.

#include <cerrno>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "wiener/errors.hpp"
#include "wiener/filter.hpp"

namespace wiener::io {

inline std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

/// Strict full-token parse (surrounding blanks allowed); false on trailing
/// garbage, empty input or overflow.
inline bool parse_double(const std::string& raw, double& out) {
    const auto s = trim(raw);
    if (s.empty()) return false;
    char* end = nullptr;
    errno = 0;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size() && errno != ERANGE;
}

inline double parse_double_or_throw(const std::string& s, const std::string& context) {
    double v = 0.0;
    if (!parse_double(s, v)) throw IoError(context + ": cannot parse number '" + s + "'");
    return v;
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    [[nodiscard]] std::vector<double> column(std::size_t j) const {
        std::vector<double> out;
        out.reserve(rows.size());
        for (const auto& r : rows) out.push_back(r.at(j));
        return out;
    }
};

inline std::string to_csv(const CsvTable& t) {
    std::string s;
    for (std::size_t j = 0; j < t.header.size(); ++j) s += (j ? "," : "") + t.header[j];
    s += '\n';
    for (const auto& r : t.rows) {
        for (std::size_t j = 0; j < r.size(); ++j) s += (j ? "," : "") + format_double(r[j]);
        s += '\n';
    }
    return s;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
    f << text;
    f.close();
    if (!f) throw IoError("write failed for '" + path.string() + "'");
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path.string() + "' for reading");
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

inline void write_csv(const std::filesystem::path& path, const CsvTable& t) { write_text(path, to_csv(t)); }

/// Parses numeric CSV. A first line that is not entirely numeric is taken as the header.
inline CsvTable parse_csv(const std::string& text, const std::string& context = "csv") {
    CsvTable t;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto trimmed = trim(line);
        if (trimmed.empty() || trimmed[0] == '#') continue;
        auto cells = split(trimmed, ',');
        std::vector<double> row;
        bool numeric = true;
        for (const auto& c : cells) {
            double v = 0.0;
            if (!parse_double(c, v)) {
                numeric = false;
                break;
            }
            row.push_back(v);
        }
        if (!numeric) {
            if (t.header.empty() && t.rows.empty()) {
                t.header = std::move(cells);
                width = t.header.size();
                continue;
            }
            throw IoError(context + ": malformed number on line " + std::to_string(lineno));
        }
        if (width == 0) width = row.size();
        if (row.size() != width) throw IoError(context + ": inconsistent column count on line " + std::to_string(lineno));
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline CsvTable read_csv(const std::filesystem::path& path) { return parse_csv(read_text(path), path.string()); }

/// First column of a CSV file as an observation series.
inline TrajectoryBuffer read_series(const std::filesystem::path& path) {
    const auto t = read_csv(path);
    if (t.rows.empty()) throw IoError(path.string() + ": no data rows");
    auto buf = TrajectoryBuffer::from_values(t.column(0));
    buf.provenance.system = "file";
    buf.provenance.observable = path.filename().string();
    return buf;
}

inline CsvTable series_table(std::span<const double> v, const std::string& name = "y") {
    CsvTable t{{name}, {}};
    t.rows.reserve(v.size());
    for (double x : v) t.rows.push_back({x});
    return t;
}

inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

// Model record:
//   format = wiener-filter-1
//   d = 3
//   coeffs = 0,0,1          (c_0 .. c_{d-1}, c_j weights y_{t-j})
//   degenerate = false
//   provenance = fnv1a:<16 hex digits>
inline std::string serialize_model(const FilterModel& m) {
    m.validate();
    char hash[40];
    std::snprintf(hash, sizeof hash, "fnv1a:%016llx", static_cast<unsigned long long>(fnv1a(m.provenance)));
    // A model read back from disk already carries the hash.
    if (m.provenance.size() == 22 && m.provenance.starts_with("fnv1a:")) std::snprintf(hash, sizeof hash, "%s", m.provenance.c_str());
    std::string s = "format = wiener-filter-1\n";
    s += "d = " + std::to_string(m.depth()) + "\n";
    s += "coeffs = ";
    for (std::size_t j = 0; j < m.depth(); ++j) s += (j ? "," : "") + format_double(m.coeffs[j]);
    s += "\ndegenerate = ";
    s += m.degenerate_fit ? "true" : "false";
    s += "\nprovenance = ";
    s += hash;
    s += "\n";
    return s;
}

using KeyValues = std::map<std::string, std::string>;

/// key = value lines; '#' starts a comment line. Duplicate keys are an error.
inline KeyValues parse_key_values(const std::string& text, const std::string& context) {
    KeyValues kv;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw IoError(context + ": expected key = value on line " + std::to_string(lineno));
        auto key = trim(std::string_view(t).substr(0, eq));
        auto value = trim(std::string_view(t).substr(eq + 1));
        if (key.empty()) throw IoError(context + ": empty key on line " + std::to_string(lineno));
        if (!kv.emplace(key, value).second) throw IoError(context + ": duplicate key '" + key + "'");
    }
    return kv;
}

inline FilterModel parse_model(const std::string& text, const std::string& context = "model") {
    const auto kv = parse_key_values(text, context);
    auto get = [&](const char* k) -> const std::string& {
        const auto it = kv.find(k);
        if (it == kv.end()) throw IoError(context + ": missing key '" + k + "'");
        return it->second;
    };
    if (get("format") != "wiener-filter-1") throw IoError(context + ": unknown format '" + get("format") + "'");
    FilterModel m;
    for (const auto& c : split(get("coeffs"), ',')) m.coeffs.push_back(parse_double_or_throw(c, context));
    double d = 0.0;
    if (!parse_double(get("d"), d) || d != static_cast<double>(m.coeffs.size()))
        throw IoError(context + ": d does not match the number of coefficients");
    const auto& deg = get("degenerate");
    if (deg != "true" && deg != "false") throw IoError(context + ": degenerate must be true or false");
    m.degenerate_fit = deg == "true";
    m.provenance = get("provenance");
    if (!all_finite(m.coeffs)) throw IoError(context + ": non-finite coefficients");
    return m;
}

inline void write_model(const std::filesystem::path& path, const FilterModel& m) { write_text(path, serialize_model(m)); }
inline FilterModel read_model(const std::filesystem::path& path) { return parse_model(read_text(path), path.string()); }

}  // namespace wiener::io
