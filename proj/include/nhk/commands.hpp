#pragma once

// Command implementations behind the nhk tool. Every artifact body is a pure
// function of the effective configuration; wall-clock data goes to a sidecar.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "nhk/bounds.hpp"
#include "nhk/config.hpp"
#include "nhk/error.hpp"
#include "nhk/geometry.hpp"
#include "nhk/io.hpp"
#include "nhk/spectral.hpp"
#include "nhk/verify.hpp"

namespace nhk::cli {

enum ExitCode : int { kSuccess = 0, kVerificationFailed = 1, kConfigError = 2, kSolverError = 3 };

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> names{"spectrum", "trace", "bounds", "verify", "report"};
  return names;
}

struct Context {
  RunConfig config;
  std::filesystem::path out_dir;
  std::ostream* out = nullptr;  // human-readable output (report)
  std::ostream* log = nullptr;  // progress; null when quiet
};

namespace detail {

class Session {
 public:
  explicit Session(const Context& ctx) : ctx_(ctx) {}

  int precision() const { return ctx_.config.output.precision; }
  std::string num(double x) const { return io::format_number(x, precision()); }

  void progress(const std::string& msg) const {
    if (ctx_.log != nullptr) *ctx_.log << msg << '\n';
  }

  void common_metadata(io::Table& t, const std::string& command, const WarpedProductModel& m,
                       const GeometryReport& g) const {
    t.metadata.emplace_back("command", command);
    t.metadata.emplace_back("config", to_json(ctx_.config).dump());
    t.metadata.emplace_back("n", std::to_string(m.dimension()));
    t.metadata.emplace_back("rho_eff", num(g.rho_eff));
    t.metadata.emplace_back("pi_min", num(g.pi_min));
    t.metadata.emplace_back("volume", num(g.volume));
    t.metadata.emplace_back("diameter", num(g.diameter));
    t.metadata.emplace_back("diameter_certified", g.diameter_certified ? "true" : "false");
  }

  static void spectrum_metadata(io::Table& t, const SpectrumTable& s) {
    t.metadata.emplace_back("mesh_points", std::to_string(s.truncation().mesh_points));
    t.metadata.emplace_back("l_max", std::to_string(s.truncation().l_max));
    t.metadata.emplace_back("modes_per_l", std::to_string(s.truncation().modes_per_l));
    t.metadata.emplace_back("lambda_cut", io::format_number(s.truncation().lambda_cut, 17));
  }

  /// Write a table in the configured format.
  void emit(const io::Table& t) {
    if (ctx_.config.output.format == "json") {
      write(t.name + ".json", io::table_to_json(t, precision()).dump(2) + "\n");
    } else {
      write(t.name + ".csv", io::render_csv(t, precision()));
    }
  }

  void write(const std::string& file, const std::string& body) {
    const auto path = ctx_.out_dir / file;
    io::write_atomic(path, body);
    written_.push_back(file);
    progress("wrote " + path.string());
  }

  /// Non-deterministic run metadata, kept out of every artifact body.
  void write_sidecar(const std::string& command, double elapsed) {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    json meta = {{"command", command},
                 {"timestamp", stamp},
                 {"elapsed_seconds", elapsed},
                 {"threads", nhk::detail::resolve_threads()},
                 {"files", written_}};
    io::write_atomic(ctx_.out_dir / "run_meta.json", meta.dump(2) + "\n");
  }

  const RunConfig& config() const { return ctx_.config; }
  std::ostream* out() const { return ctx_.out; }

 private:
  const Context& ctx_;
  std::vector<std::string> written_;
};

inline void spectrum_command(Session& s) {
  const RunConfig& cfg = s.config();
  s.progress("assembling spectrum");
  const Prepared prep = prepare(cfg, false);
  const SpectrumTable& sp = prep.spectrum;

  io::Table modes{"spectrum", {}, {"l", "j", "lambda", "multiplicity"}, {}};
  s.common_metadata(modes, "spectrum", prep.model, prep.geometry);
  Session::spectrum_metadata(modes, sp);
  for (std::size_t i = 0; i < sp.modes().size(); ++i) {
    const RadialMode& m = sp.modes()[i];
    modes.add_row({std::int64_t{m.l}, std::int64_t{m.j}, m.lambda, sp.multiplicity(i)});
  }
  s.emit(modes);

  io::Table sorted{"spectrum_sorted", {}, {"k", "lambda", "l", "j"}, {}};
  s.common_metadata(sorted, "spectrum", prep.model, prep.geometry);
  Session::spectrum_metadata(sorted, sp);
  for (std::size_t k = 0; k < sp.sorted().size(); ++k) {
    const SortedEigenvalue& e = sp.sorted()[k];
    const RadialMode& m = sp.modes()[e.mode];
    sorted.add_row({static_cast<std::int64_t>(k), e.lambda, std::int64_t{m.l}, std::int64_t{m.j}});
  }
  s.emit(sorted);
}

inline void trace_command(Session& s) {
  const RunConfig& cfg = s.config();
  s.progress("assembling spectrum");
  const Prepared prep = prepare(cfg, false);
  const int n = prep.model.dimension();
  const double rho = prep.geometry.rho_eff;

  io::Table t{"trace", {}, {"t", "trace", "tail_bound", "lower", "upper"}, {}};
  s.common_metadata(t, "trace", prep.model, prep.geometry);
  Session::spectrum_metadata(t, prep.spectrum);
  for (double time : cfg.grids.t.resolve(rho)) {
    const TraceValue tv = heat_trace(prep.spectrum, time);
    const TraceBounds b = trace_bounds(n, rho, prep.geometry.volume, time);
    t.add_row({time, tv.value, tv.tail_bound, b.lower, b.upper});
  }
  s.emit(t);
}

inline void bounds_command(Session& s) {
  const RunConfig& cfg = s.config();
  const WarpedProductModel model = cfg.model.build();
  const GeometryReport g = curvature_report(model);
  const int n = model.dimension();
  const double rho = g.rho_eff, mu = g.volume;
  const bool have_d = g.diameter_certified;
  const VolumeBounds vb = volume_bounds(n, rho);

  const auto volume_meta = [&](io::Table& t) {
    t.metadata.emplace_back("volume_bound", s.num(vb.paper_bound));
    t.metadata.emplace_back("bishop_bound", s.num(vb.bishop_bound));
    t.metadata.emplace_back("volume_bound_ratio", s.num(vb.ratio));
  };

  io::Table bt{"bounds_t",
               {},
               {"t", "ondiag_lower", "ondiag_upper", "trace_lower", "trace_upper", "refined_upper", "refined_branch",
                "liyau_a", "liyau_b"},
               {}};
  s.common_metadata(bt, "bounds", model, g);
  volume_meta(bt);
  if (have_d) bt.metadata.emplace_back("switch_time", s.num(refined_switch_time(n, rho, g.diameter)));
  for (double t : cfg.grids.t.resolve(rho)) {
    const OnDiagonalBounds od = ondiag_bounds(n, rho, mu, t);
    const TraceBounds tb = trace_bounds(n, rho, mu, t);
    const LiYauCoeffs ly = liyau_coeffs(n, rho, t);
    io::Cell refined, branch;
    if (have_d) {
      const RefinedUpper ru = refined_upper(n, rho, mu, g.diameter, t);
      refined = ru.value;
      branch = std::string(to_string(ru.branch));
    }
    bt.add_row({t, od.lower, od.upper, tb.lower, tb.upper, refined, branch, ly.a, ly.b});
  }
  s.emit(bt);

  io::Table bk{"bounds_k",
               {},
               {"k", "bound1", "bound2", "lb1_asym", "lb2_asym", "lb2_leading", "weyl"},
               {}};
  s.common_metadata(bk, "bounds", model, g);
  volume_meta(bk);
  const double diam = have_d ? g.diameter : comparison_diameter(rho, n);
  for (int k = 0; k <= cfg.grids.k_max; ++k) {
    std::vector<io::Cell> row{std::int64_t{k}, eigen_bound1(n, rho, k), {}, {}, {}, {}, {}};
    if (have_d) {
      if (auto b2 = eigen_bound2(n, rho, g.diameter, k)) row[2] = *b2;
    }
    if (k >= 1) {
      const Asymptotics a = asymptotics(n, rho, mu, diam, k);
      row[3] = a.lb1_asym;
      if (have_d) {
        row[4] = a.lb2_asym;
        row[5] = a.lb2_leading;
      }
      row[6] = a.weyl;
    }
    bk.add_row(std::move(row));
  }
  s.emit(bk);
}

inline io::Table report_table(const VerificationReport& rep) {
  io::Table t{"report",
              {},
              {"check_id", "variant", "t", "s", "r1", "r2", "r3", "theta2", "theta3", "k", "eps", "lhs", "rhs",
               "margin", "slack", "status", "reason"},
              {}};
  t.metadata.emplace_back("config", rep.config.dump());
  t.metadata.emplace_back("verdict", rep.verdict_pass ? "pass" : "fail");
  for (const std::string& note : rep.notes) t.metadata.emplace_back("note", note);
  const auto opt = [](const std::optional<double>& v) -> io::Cell {
    if (v) return *v;
    return {};
  };
  for (const CheckResult& r : rep.results) {
    const CheckParams& p = r.params;
    const bool judged = r.status != Status::skipped;
    t.add_row({to_string(r.id), r.variant, opt(p.t), opt(p.s), opt(p.r1), opt(p.r2), opt(p.r3), opt(p.theta2),
               opt(p.theta3), opt(p.k), opt(p.eps), judged ? io::Cell{r.lhs} : io::Cell{},
               judged ? io::Cell{r.rhs} : io::Cell{}, judged ? io::Cell{r.margin} : io::Cell{},
               judged ? io::Cell{r.slack} : io::Cell{}, std::string(to_string(r.status)), r.reason});
  }
  return t;
}

inline int verify_command(Session& s) {
  s.progress("assembling spectra and running checks");
  const VerificationReport rep = run_suite(s.config());
  s.write("report.json", to_json(rep).dump(2) + "\n");
  s.write("report.csv", io::render_csv(report_table(rep), s.precision()));
  for (const CheckSummary& cs : rep.summaries) {
    s.progress(to_string(cs.id) + ": " + std::to_string(cs.passed) + " pass, " + std::to_string(cs.failed) +
               " fail, " + std::to_string(cs.skipped) + " skipped");
  }
  return rep.verdict_pass ? kSuccess : kVerificationFailed;
}

inline int report_command(Session& s) {
  const RunConfig& cfg = s.config();
  s.progress("assembling spectra and running checks");
  const Prepared prep = prepare(cfg, true);
  const VerificationReport rep = run_suite(cfg, prep);
  const GeometryReport& g = prep.geometry;
  const int n = prep.model.dimension();

  // plot-ready columns: whitespace separated, '#' header
  std::string dat = "# config: " + to_json(cfg).dump() + "\n";
  dat += "# t trace trace_lower trace_upper p_pole ondiag_lower ondiag_upper\n";
  const ModeSamples pole(prep.spectrum, 0.0);
  for (double t : cfg.grids.t.resolve(g.rho_eff)) {
    const TraceValue tv = heat_trace(prep.spectrum, t);
    const TraceBounds tb = trace_bounds(n, g.rho_eff, g.volume, t);
    const KernelValue kv = heat_kernel(prep.spectrum, pole, pole, 0.0, t);
    const OnDiagonalBounds od = ondiag_bounds(n, g.rho_eff, g.volume, t);
    const double row[] = {t, tv.value, tb.lower, tb.upper, kv.value, od.lower, od.upper};
    for (std::size_t i = 0; i < std::size(row); ++i) dat += (i ? " " : "") + s.num(row[i]);
    dat += '\n';
  }
  s.write("report.dat", dat);

  if (std::ostream* os = s.out()) {
    auto& o = *os;
    o << "model       " << cfg.model.family << ", n = " << n << '\n';
    o << "rho_eff     " << s.num(g.rho_eff) << '\n';
    o << "pi_min      " << s.num(g.pi_min) << '\n';
    o << "volume      " << s.num(g.volume) << '\n';
    o << "diameter    " << s.num(g.diameter) << (g.diameter_certified ? "" : " (not certified)") << '\n';
    o << "spectrum    " << rep.spectrum.modes << " radial modes, " << rep.spectrum.eigenvalues
      << " eigenvalues below " << s.num(rep.spectrum.lambda_cut) << '\n';
    o << "lambda_1..5";
    for (std::size_t k = 1; k <= 5 && k < prep.spectrum.sorted().size(); ++k) {
      o << ' ' << s.num(prep.spectrum.eigenvalue(k));
    }
    o << "\n\ncheck   total   pass   fail   skip   min margin\n";
    for (const CheckSummary& cs : rep.summaries) {
      char line[128];
      std::snprintf(line, sizeof line, "%-5s %7zu %6zu %6zu %6zu   %s\n", to_string(cs.id).c_str(), cs.count,
                    cs.passed, cs.failed, cs.skipped, cs.min_margin ? s.num(*cs.min_margin).c_str() : "-");
      o << line;
    }
    for (const std::string& note : rep.notes) o << "note: " << note << '\n';
    o << "\nverdict: " << (rep.verdict_pass ? "pass" : "fail") << '\n';
  }
  return rep.verdict_pass ? kSuccess : kVerificationFailed;
}

}  // namespace detail

/// Run one command; throws on configuration, geometry and solver errors.
inline int run_command(const std::string& command, const Context& ctx) {
  const auto start = std::chrono::steady_clock::now();
  detail::Session s(ctx);
  int code = kSuccess;
  if (command == "spectrum") {
    detail::spectrum_command(s);
  } else if (command == "trace") {
    detail::trace_command(s);
  } else if (command == "bounds") {
    detail::bounds_command(s);
  } else if (command == "verify") {
    code = detail::verify_command(s);
  } else if (command == "report") {
    code = detail::report_command(s);
  } else {
    throw ConfigError("unknown command '" + command + "'");
  }
  s.write_sidecar(command, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  return code;
}

/// Map the error taxonomy onto exit codes.
inline int execute(const std::string& command, const Context& ctx, std::ostream& err) {
  try {
    return run_command(command, ctx);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const GeometryError& e) {
    err << "geometry error (" << e.hypothesis() << "): " << e.what() << '\n';
    return kConfigError;
  } catch (const DomainError& e) {
    err << "invalid model: " << e.what() << '\n';
    return kConfigError;
  } catch (const TruncationError& e) {
    err << "truncation error: " << e.what() << '\n';
    return kSolverError;
  } catch (const SolverError& e) {
    err << "solver error: " << e.what() << '\n';
    return kSolverError;
  } catch (const UnsupportedError& e) {
    err << "unsupported: " << e.what() << '\n';
    return kSolverError;
  }
}

}  // namespace nhk::cli
