#pragma once

// Tabular artifacts: fixed-precision number formatting, CSV/JSON rendering and
// atomic file output.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "nhk/error.hpp"

namespace nhk::io {

using json = nlohmann::json;

/// Exactly `precision` significant digits; ties resolve to even on the exact binary value.
inline std::string format_number(double x, int precision) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%#.*g", precision, x);
  std::string s(buf);
  // a bare trailing point appears only at precision 1
  if (const auto dot = s.find('.'); dot != std::string::npos && (dot + 1 == s.size() || s[dot + 1] == 'e')) {
    s.erase(dot, 1);
  }
  return s;
}

/// Empty cells stand for "not applicable".
using Cell = std::variant<std::monostate, double, std::int64_t, std::string>;

struct Table {
  std::string name;
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add_row(std::vector<Cell> row) {
    if (row.size() != columns.size()) throw DomainError("Table '" + name + "': row width does not match header");
    rows.push_back(std::move(row));
  }
};

namespace detail {

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string render_cell(const Cell& c, int precision) {
  if (const auto* d = std::get_if<double>(&c)) return format_number(*d, precision);
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  if (const auto* s = std::get_if<std::string>(&c)) return csv_escape(*s);
  return {};
}

}  // namespace detail

/// CSV with `# key: value` preamble lines, one header row, LF endings.
inline std::string render_csv(const Table& t, int precision) {
  std::string out;
  for (const auto& [k, v] : t.metadata) out += "# " + k + ": " + v + "\n";
  for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + t.columns[i];
  out += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += detail::render_cell(row[i], precision);
    }
    out += '\n';
  }
  return out;
}

/// Same content as JSON: {"metadata": {...}, "columns": [...], "rows": [[...], ...]}.
/// Numbers go through format_number so both renderings carry identical digits.
inline json table_to_json(const Table& t, int precision) {
  json meta = json::object();
  for (const auto& [k, v] : t.metadata) meta[k] = v;
  json rows = json::array();
  for (const auto& row : t.rows) {
    json r = json::array();
    for (const Cell& c : row) {
      if (const auto* d = std::get_if<double>(&c)) {
        r.push_back(std::isfinite(*d) ? json::parse(format_number(*d, precision)) : json(nullptr));
      } else if (const auto* i = std::get_if<std::int64_t>(&c)) {
        r.push_back(*i);
      } else if (const auto* s = std::get_if<std::string>(&c)) {
        r.push_back(*s);
      } else {
        r.push_back(nullptr);
      }
    }
    rows.push_back(std::move(r));
  }
  return {{"name", t.name}, {"metadata", meta}, {"columns", t.columns}, {"rows", rows}};
}

/// Write through a sibling temp file and rename it into place.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    os.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!os) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot read config file '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

}  // namespace nhk::io
