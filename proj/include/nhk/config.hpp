#pragma once

// Run configuration: strict JSON schema with documented defaults.

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "nhk/error.hpp"
#include "nhk/geometry.hpp"

namespace nhk {

using json = nlohmann::json;

enum class CheckId { C1, C2, C3, C4, C5, C6, C7, C8, C9, C10, C11 };

inline constexpr std::array<CheckId, 11> kAllChecks = {CheckId::C1, CheckId::C2, CheckId::C3, CheckId::C4,
                                                       CheckId::C5, CheckId::C6, CheckId::C7, CheckId::C8,
                                                       CheckId::C9, CheckId::C10, CheckId::C11};

inline std::string to_string(CheckId id) { return "C" + std::to_string(static_cast<int>(id) + 1); }

inline std::optional<CheckId> parse_check_id(std::string_view s) {
  for (CheckId id : kAllChecks) {
    if (to_string(id) == s) return id;
  }
  return std::nullopt;
}

struct ModelConfig {
  std::string family = "round_cap";
  int n = 2;
  double rho0 = 1.0;
  double cap_fraction = 1.0;
  double r_max = 0.0;
  std::vector<double> samples;

  WarpedProductModel build() const {
    if (family == "round_cap") return make_round_cap(n, rho0, cap_fraction);
    return make_warped(n, samples, r_max);
  }
};

struct SolverConfig {
  int mesh_points = 2000;
  int l_max = 40;
  int modes_per_l = 0;
  bool refine = true;
};

struct TimeGrid {
  std::optional<double> min;  // default 0.05 / rho_eff
  std::optional<double> max;  // default 5 / rho_eff
  int count = 16;
  bool log = true;

  std::vector<double> resolve(double rho_eff) const {
    const double lo = min.value_or(0.05 / rho_eff);
    const double hi = max.value_or(5.0 / rho_eff);
    std::vector<double> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) {
      const double frac = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
      if (i + 1 == count && count > 1) {
        out.push_back(hi);
      } else if (log) {
        out.push_back(lo * std::pow(hi / lo, frac));
      } else {
        out.push_back(lo + (hi - lo) * frac);
      }
    }
    return out;
  }
};

struct GridConfig {
  TimeGrid t;
  int r_count = 12;
  int k_max = 200;
};

struct OutputConfig {
  std::string format = "csv";
  std::string path = "out";
  int precision = 9;
};

struct RunConfig {
  ModelConfig model;
  SolverConfig solver;
  GridConfig grids;
  std::vector<CheckId> checks{kAllChecks.begin(), kAllChecks.end()};
  std::optional<std::vector<double>> test_samples;
  OutputConfig output;

  bool enabled(CheckId id) const { return std::find(checks.begin(), checks.end(), id) != checks.end(); }
};

namespace detail {

struct SchemaReader {
  static void only_keys(const json& obj, const std::string& where, std::initializer_list<std::string_view> keys) {
    if (!obj.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [k, v] : obj.items()) {
      if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
        throw ConfigError("unknown key '" + (where.empty() ? k : where + "." + k) + "'");
      }
    }
  }

  static std::string join(const std::string& where, std::string_view key) {
    return where.empty() ? std::string(key) : where + "." + std::string(key);
  }

  static int get_int(const json& obj, const std::string& where, std::string_view key, int fallback, int lo,
                     int hi) {
    const std::string field = join(where, key);
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(std::string(key));
    if (!v.is_number_integer()) throw ConfigError(field + ": expected an integer");
    const auto x = v.get<long long>();
    if (x < lo || x > hi) {
      throw ConfigError(field + ": value " + std::to_string(x) + " outside [" + std::to_string(lo) + ", " +
                        std::to_string(hi) + "]");
    }
    return static_cast<int>(x);
  }

  static double get_number(const json& obj, const std::string& where, std::string_view key, double fallback) {
    const std::string field = join(where, key);
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(std::string(key));
    if (!v.is_number()) throw ConfigError(field + ": expected a number");
    return v.get<double>();
  }

  static std::optional<double> get_optional_number(const json& obj, const std::string& where,
                                                   std::string_view key) {
    if (!obj.contains(key) || obj.at(std::string(key)).is_null()) return std::nullopt;
    return get_number(obj, where, key, 0.0);
  }

  static bool get_bool(const json& obj, const std::string& where, std::string_view key, bool fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(std::string(key));
    if (!v.is_boolean()) throw ConfigError(join(where, key) + ": expected a boolean");
    return v.get<bool>();
  }

  static std::string get_string(const json& obj, const std::string& where, std::string_view key,
                                std::string fallback) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(std::string(key));
    if (!v.is_string()) throw ConfigError(join(where, key) + ": expected a string");
    return v.get<std::string>();
  }

  static std::vector<double> get_numbers(const json& obj, const std::string& where, std::string_view key) {
    const std::string field = join(where, key);
    if (!obj.contains(key)) throw ConfigError(field + ": required");
    const json& v = obj.at(std::string(key));
    if (!v.is_array()) throw ConfigError(field + ": expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) throw ConfigError(field + "[" + std::to_string(i) + "]: expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }
};

}  // namespace detail

/// Parse and validate a configuration document. Structural checks only:
/// geometric hypotheses are certified later by curvature_report.
inline RunConfig parse_config(const json& doc) {
  using R = detail::SchemaReader;
  RunConfig cfg;
  R::only_keys(doc, "", {"model", "solver", "grids", "checks", "test_function", "output"});

  if (!doc.contains("model")) throw ConfigError("model: required");
  const json& m = doc.at("model");
  R::only_keys(m, "model", {"family", "n", "rho0", "cap_fraction", "r_max", "samples"});
  cfg.model.family = R::get_string(m, "model", "family", "round_cap");
  if (!m.contains("n")) throw ConfigError("model.n: required");
  cfg.model.n = R::get_int(m, "model", "n", 2, 2, 1000);
  if (cfg.model.family == "round_cap") {
    for (const char* k : {"r_max", "samples"}) {
      if (m.contains(k)) throw ConfigError(std::string("model.") + k + ": not valid for family round_cap");
    }
    if (!m.contains("rho0")) throw ConfigError("model.rho0: required");
    cfg.model.rho0 = R::get_number(m, "model", "rho0", 1.0);
    cfg.model.cap_fraction = R::get_number(m, "model", "cap_fraction", 1.0);
    if (!(cfg.model.rho0 > 0.0)) throw ConfigError("model.rho0: must be positive");
    if (!(cfg.model.cap_fraction > 0.0)) throw ConfigError("model.cap_fraction: must be positive");
  } else if (cfg.model.family == "warped") {
    for (const char* k : {"rho0", "cap_fraction"}) {
      if (m.contains(k)) throw ConfigError(std::string("model.") + k + ": not valid for family warped");
    }
    if (!m.contains("r_max")) throw ConfigError("model.r_max: required");
    cfg.model.r_max = R::get_number(m, "model", "r_max", 0.0);
    if (!(cfg.model.r_max > 0.0)) throw ConfigError("model.r_max: must be positive");
    cfg.model.samples = R::get_numbers(m, "model", "samples");
    if (cfg.model.samples.size() < 5) throw ConfigError("model.samples: need at least 5 values");
  } else {
    throw ConfigError("model.family: expected \"round_cap\" or \"warped\"");
  }

  if (doc.contains("solver")) {
    const json& s = doc.at("solver");
    R::only_keys(s, "solver", {"mesh_points", "l_max", "modes_per_l", "refine"});
    cfg.solver.mesh_points = R::get_int(s, "solver", "mesh_points", cfg.solver.mesh_points, 64, 1 << 22);
    cfg.solver.l_max = R::get_int(s, "solver", "l_max", cfg.solver.l_max, 0, 100000);
    cfg.solver.modes_per_l = R::get_int(s, "solver", "modes_per_l", cfg.solver.modes_per_l, 0, 1 << 22);
    cfg.solver.refine = R::get_bool(s, "solver", "refine", cfg.solver.refine);
  }

  if (doc.contains("grids")) {
    const json& g = doc.at("grids");
    R::only_keys(g, "grids", {"t", "r_count", "k_max"});
    if (g.contains("t")) {
      const json& t = g.at("t");
      R::only_keys(t, "grids.t", {"min", "max", "count", "log"});
      cfg.grids.t.min = R::get_optional_number(t, "grids.t", "min");
      cfg.grids.t.max = R::get_optional_number(t, "grids.t", "max");
      cfg.grids.t.count = R::get_int(t, "grids.t", "count", cfg.grids.t.count, 1, 100000);
      cfg.grids.t.log = R::get_bool(t, "grids.t", "log", cfg.grids.t.log);
      if (cfg.grids.t.min && !(*cfg.grids.t.min > 0.0)) throw ConfigError("grids.t.min: must be positive");
      if (cfg.grids.t.max && !(*cfg.grids.t.max > 0.0)) throw ConfigError("grids.t.max: must be positive");
      if (cfg.grids.t.min && cfg.grids.t.max && *cfg.grids.t.min > *cfg.grids.t.max) {
        throw ConfigError("grids.t: min exceeds max");
      }
    }
    cfg.grids.r_count = R::get_int(g, "grids", "r_count", cfg.grids.r_count, 1, 100000);
    cfg.grids.k_max = R::get_int(g, "grids", "k_max", cfg.grids.k_max, 0, 100000000);
  }

  if (doc.contains("checks")) {
    const json& c = doc.at("checks");
    if (!c.is_array()) throw ConfigError("checks: expected an array of check ids");
    cfg.checks.clear();
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (!c[i].is_string()) throw ConfigError("checks[" + std::to_string(i) + "]: expected a string");
      const auto id = parse_check_id(c[i].get<std::string>());
      if (!id) throw ConfigError("checks[" + std::to_string(i) + "]: unknown check id '" + c[i].get<std::string>() + "'");
      if (!cfg.enabled(*id)) cfg.checks.push_back(*id);
    }
    std::sort(cfg.checks.begin(), cfg.checks.end());
  }

  if (doc.contains("test_function")) {
    const json& tf = doc.at("test_function");
    R::only_keys(tf, "test_function", {"samples"});
    auto samples = R::get_numbers(tf, "test_function", "samples");
    if (samples.size() < 2) throw ConfigError("test_function.samples: need at least 2 values");
    for (double v : samples) {
      if (!(v > 0.0)) throw ConfigError("test_function.samples: values must be strictly positive");
    }
    cfg.test_samples = std::move(samples);
  }

  if (doc.contains("output")) {
    const json& o = doc.at("output");
    R::only_keys(o, "output", {"format", "path", "precision"});
    cfg.output.format = R::get_string(o, "output", "format", cfg.output.format);
    if (cfg.output.format != "csv" && cfg.output.format != "json") {
      throw ConfigError("output.format: expected \"csv\" or \"json\"");
    }
    cfg.output.path = R::get_string(o, "output", "path", cfg.output.path);
    cfg.output.precision = R::get_int(o, "output", "precision", cfg.output.precision, 1, 17);
  }
  return cfg;
}

/// Parse configuration text; JSON syntax errors report line and column.
inline RunConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    // byte offset -> line/column
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError("malformed JSON at line " + std::to_string(line) + ", column " + std::to_string(col) + ": " +
                      e.what());
  }
  return parse_config(doc);
}

/// Effective configuration with every default filled in.
inline json to_json(const RunConfig& c) {
  json model;
  model["family"] = c.model.family;
  model["n"] = c.model.n;
  if (c.model.family == "round_cap") {
    model["rho0"] = c.model.rho0;
    model["cap_fraction"] = c.model.cap_fraction;
  } else {
    model["r_max"] = c.model.r_max;
    model["samples"] = c.model.samples;
  }
  json t;
  t["min"] = c.grids.t.min ? json(*c.grids.t.min) : json(nullptr);
  t["max"] = c.grids.t.max ? json(*c.grids.t.max) : json(nullptr);
  t["count"] = c.grids.t.count;
  t["log"] = c.grids.t.log;
  json checks = json::array();
  for (CheckId id : c.checks) checks.push_back(to_string(id));
  json out = {
      {"model", model},
      {"solver",
       {{"mesh_points", c.solver.mesh_points},
        {"l_max", c.solver.l_max},
        {"modes_per_l", c.solver.modes_per_l},
        {"refine", c.solver.refine}}},
      {"grids", {{"t", t}, {"r_count", c.grids.r_count}, {"k_max", c.grids.k_max}}},
      {"checks", checks},
      {"output", {{"format", c.output.format}, {"path", c.output.path}, {"precision", c.output.precision}}},
  };
  if (c.test_samples) out["test_function"] = {{"samples", *c.test_samples}};
  return out;
}

}  // namespace nhk
