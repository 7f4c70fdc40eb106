// Acceptance criteria runner: `acceptance AC<n>` prints one PASS/FAIL line and exits nonzero on failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "nhk/io.hpp"
#include "nhk/verify.hpp"

namespace {

using namespace nhk;
using Clock = std::chrono::steady_clock;
constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

RunConfig load(const std::string& name) {
  return parse_config(std::string_view(io::read_file(std::string(NHK_SOURCE_DIR) + "/configs/" + name)));
}

SpectrumTable solve(double cap_fraction, int l_max = 40, int mesh = 2000) {
  const auto m = make_round_cap(2, 1.0, cap_fraction);
  return assemble_spectrum(m, curvature_report(m).rho_eff, l_max, mesh);
}

// Neumann hemisphere: L(L+1) with multiplicity L+1.
std::vector<double> hemisphere_oracle(std::size_t count) {
  std::vector<double> out;
  for (int L = 0; out.size() < count; ++L) {
    for (int m = 0; m <= L && out.size() < count; ++m) out.push_back(L * (L + 1.0));
  }
  return out;
}

Outcome ac1() {
  constexpr double kRelTol = 1e-4, kMaxSeconds = 60.0;
  Outcome o;
  const auto start = Clock::now();
  const SpectrumTable s = solve(1.0);
  const double elapsed = seconds_since(start);
  const auto oracle = hemisphere_oracle(10);
  double worst = 0.0;
  for (std::size_t k = 0; k < 10; ++k) {
    const double err = std::abs(s.eigenvalue(k) - oracle[k]);
    worst = std::max(worst, k == 0 ? err : err / oracle[k]);
  }
  o.detail << "first 10 sorted eigenvalues max rel err " << worst << " (tol " << kRelTol << "), " << elapsed
           << " s (limit " << kMaxSeconds << ")";
  o.require(worst <= kRelTol, "eigenvalue accuracy");
  o.require(elapsed <= kMaxSeconds, "runtime");
  return o;
}

Outcome ac2() {
  constexpr double kTol = 1e-4;
  Outcome o;
  const SpectrumTable s = solve(1.0);
  const double mu = s.volume();
  double min_margin = 1e300;
  for (double t : {0.25, 0.5, 1.0, 2.0}) {
    const TraceBounds b = trace_bounds(2, 1.0, mu, t);
    const TraceValue tr = heat_trace(s, t);
    min_margin = std::min({min_margin, tr.value - b.lower, b.upper - tr.value});
  }
  o.require(min_margin > 0.0, "sandwich margins");
  const TraceBounds b = trace_bounds(2, 1.0, mu, 1.0);
  const double tr = heat_trace(s, 1.0).value;
  const double expect[3] = {0.685117, 1.278131, 2.055150};
  const double got[3] = {b.lower, tr, b.upper};
  double worst = 0.0;
  for (int i = 0; i < 3; ++i) worst = std::max(worst, std::abs(got[i] - expect[i]));
  o.detail << "min margin " << min_margin << "; t=1 triple (" << got[0] << ", " << got[1] << ", " << got[2]
           << ") max deviation " << worst << " (tol " << kTol << ")";
  o.require(worst <= kTol, "t = 1 triple");
  return o;
}

Outcome ac3() {
  constexpr double kFixtureTol = 1e-5;
  constexpr int kMax = 200;
  Outcome o;
  const SpectrumTable hemi = solve(1.0), cap = solve(0.75);
  int violations = 0, checked = 0;
  for (const SpectrumTable* s : {&hemi, &cap}) {
    for (int k = 0; k <= kMax; ++k) {
      ++checked;
      if (eigen_bound1(2, s->rho_eff(), k) > s->eigenvalue(k)) ++violations;
    }
  }
  int checked2 = 0;
  const double diam = curvature_report(make_round_cap(2, 1.0, 1.0)).diameter;
  for (int k = 13; k <= kMax; ++k) {
    const auto b2 = eigen_bound2(2, 1.0, diam, k);
    if (!b2) continue;
    ++checked2;
    if (*b2 > hemi.eigenvalue(k)) ++violations;
  }
  const double b1 = eigen_bound1(2, 1.0, 1);
  o.detail << checked << " bound1 and " << checked2 << " bound2 comparisons, " << violations
           << " violations; bound1(1) = " << b1 << " (expect 0.507642 +- " << kFixtureTol << ")";
  o.require(violations == 0, "lower bounds");
  o.require(checked2 > 0, "bound2 coverage");
  o.require(std::abs(b1 - 0.507642) <= kFixtureTol, "bound1(1) fixture");
  return o;
}

Outcome ac4() {
  constexpr double kMaxSeconds = 300.0;
  Outcome o;
  const auto start = Clock::now();
  RunConfig cfg = load("hemisphere.json");
  cfg.checks = {CheckId::C1, CheckId::C2, CheckId::C3, CheckId::C4, CheckId::C6, CheckId::C10, CheckId::C11};
  const VerificationReport rep = run_suite(cfg);
  const double elapsed = seconds_since(start);
  std::size_t failed = 0, passed = 0;
  for (const auto& s : rep.summaries) {
    failed += s.failed;
    passed += s.passed;
    o.detail << to_string(s.id) << " " << s.passed << "/" << s.count << " ";
  }
  o.detail << "| " << failed << " failures, " << elapsed << " s (limit " << kMaxSeconds << ")";
  o.require(rep.summaries.size() == cfg.checks.size(), "every check ran");
  o.require(failed == 0 && passed > 0, "zero failures");
  o.require(elapsed <= kMaxSeconds, "runtime");
  return o;
}

Outcome ac5() {
  constexpr double kLo = 0.99, kHi = 1.01, kK = 1e8;
  Outcome o;
  const auto start = Clock::now();
  const int n = 2;
  const double rho = 1.0, diam = kPi;
  const double leading1 = n * rho / (3.0 * std::numbers::e) * std::pow(kK, 2.0 / n);
  const double r1 = eigen_bound1(n, rho, kK) / leading1;
  const double mu = 2.0 * kPi;  // hemisphere volume, only enters the Weyl term
  const double r2 = *eigen_bound2(n, rho, diam, kK) / asymptotics(n, rho, mu, diam, kK).lb2_asym;
  o.detail << "bound1 ratio " << r1 << ", bound2/lb2_asym " << r2 << " (band [" << kLo << ", " << kHi << "]), "
           << seconds_since(start) << " s";
  o.require(r1 >= kLo && r1 <= kHi, "bound1 ratio");
  o.require(r2 >= kLo && r2 <= kHi, "bound2 ratio");
  return o;
}

Outcome ac6() {
  constexpr double kTol = 1e-10, kVariation = 0.05;
  Outcome o;
  int models = 0;
  for (const char* name : {"hemisphere.json", "cap075.json", "cap060.json", "ball3.json", "warped.json"}) {
    const auto m = load(name).model.build();
    const GeometryReport g = curvature_report(m);
    ++models;
    o.require(g.volume <= volume_bounds(m.dimension(), g.rho_eff).paper_bound, std::string("volume of ") + name);
  }
  const VolumeBounds v2 = volume_bounds(2, 1.0);
  o.require(std::abs(v2.paper_bound - 6 * kPi) <= kTol && std::abs(v2.bishop_bound - 4 * kPi) <= kTol,
            "(6 pi, 4 pi) fixture");
  const auto normalized = [](int n) {
    return std::exp(volume_bounds(n, 1.0).log_ratio - std::log(n) - 0.5 * n * std::log(3.0 / std::numbers::e));
  };
  const double a = normalized(100), b = normalized(200);
  const double change = std::abs(b / a - 1.0);
  o.detail << models << " catalog models within (6 pi/rho)^{n/2}; (" << v2.paper_bound << ", " << v2.bishop_bound
           << "); normalized ratio n=100 " << a << ", n=200 " << b << ", change " << change << " (limit "
           << kVariation << ")";
  o.require(change < kVariation, "normalized ratio variation");
  return o;
}

Outcome ac7() {
  constexpr double kRho = 1e-8, kT = 1.0, kATol = 1e-7, kBTol = 1e-6;
  Outcome o;
  for (int n : {2, 3, 10}) {
    const LiYauCoeffs c = liyau_coeffs(n, kRho, kT);
    const double bdev = std::abs(c.b * 2.0 * kT / n - 1.0);
    o.detail << "n=" << n << " a=" << c.a << " |b*2t/n-1|=" << bdev << "; ";
    o.require(c.a >= 1.0 - kATol && c.a <= 1.0, "a in [1 - 1e-7, 1]");
    o.require(bdev <= kBTol, "b limit");
  }
  return o;
}

Outcome ac8() {
  constexpr double kHeatTol = 1e-5, kSemigroupTol = 1e-8, kRatioLo = 3.0, kRatioHi = 5.0;
  Outcome o;
  double heat = 0.0, semi = 0.0;
  for (double cap : {1.0, 0.6}) {
    const SpectrumTable s = solve(cap);
    const double R = s.mesh().r_max;
    std::vector<double> f;
    for (double r : s.mesh().nodes) f.push_back(1.0 + 0.5 * std::pow(std::cos(0.5 * kPi * r / R), 2));
    const RadialSemigroup P(s, f);
    const double h = 1e-4;
    for (double t : {0.05, 0.3, 1.0}) {
      for (double r : {0.0, 0.5 * R, R}) {
        const double dt = (P.at(t + h, r).value - P.at(t - h, r).value) / (2 * h);
        const double lap = P.at(t, r).laplacian;
        heat = std::max(heat, std::abs(dt - lap) / std::max(std::abs(lap), 1e-3));
      }
    }
    const RadialSemigroup Q(s, P.on_mesh(0.2));
    for (double r : {0.0, 0.3, R}) semi = std::max(semi, std::abs(Q.at(0.35, r).value - P.at(0.55, r).value));
  }
  // mesh doubling: exact errors on the hemisphere, successive differences on the 0.6-cap
  std::vector<double> ratios;
  const auto hemi = make_round_cap(2, 1.0, 1.0), cap = make_round_cap(2, 1.0, 0.6);
  for (auto [l, j, exact] : {std::tuple{0, 1, 6.0}, {1, 0, 2.0}, {3, 0, 12.0}}) {
    const double e1 = std::abs(solve_radial_modes(hemi, l, 250, j + 1)[j].lambda - exact);
    const double e2 = std::abs(solve_radial_modes(hemi, l, 500, j + 1)[j].lambda - exact);
    ratios.push_back(e1 / e2);
  }
  for (auto [l, j] : {std::pair{0, 1}, {2, 0}}) {
    const double a = solve_radial_modes(cap, l, 250, j + 1)[j].lambda;
    const double b = solve_radial_modes(cap, l, 500, j + 1)[j].lambda;
    const double c = solve_radial_modes(cap, l, 1000, j + 1)[j].lambda;
    ratios.push_back((a - b) / (b - c));
  }
  const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
  o.detail << "heat-equation residual " << heat << " (tol " << kHeatTol << "), semigroup defect " << semi << " (tol "
           << kSemigroupTol << "), convergence ratios in [" << *lo << ", " << *hi << "]";
  o.require(heat <= kHeatTol, "heat equation");
  o.require(semi <= kSemigroupTol, "semigroup property");
  o.require(*lo >= kRatioLo && *hi <= kRatioHi, "convergence ratio");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<std::string, std::function<Outcome()>> criteria{{"AC1", ac1}, {"AC2", ac2}, {"AC3", ac3},
                                                                 {"AC4", ac4}, {"AC5", ac5}, {"AC6", ac6},
                                                                 {"AC7", ac7}, {"AC8", ac8}};
  std::vector<std::string> ids;
  for (int i = 1; i < argc; ++i) ids.emplace_back(argv[i]);
  if (ids.empty()) {
    for (const auto& [id, fn] : criteria) ids.push_back(id);
  }
  int failures = 0;
  for (const std::string& id : ids) {
    auto it = criteria.find(id);
    if (it == criteria.end()) {
      std::fprintf(stderr, "unknown criterion %s\n", id.c_str());
      return 2;
    }
    try {
      Outcome o = it->second();
      std::printf("%s %s %s\n", id.c_str(), o.pass ? "PASS" : "FAIL", o.detail.str().c_str());
      failures += o.pass ? 0 : 1;
    } catch (const std::exception& e) {
      std::printf("%s FAIL exception: %s\n", id.c_str(), e.what());
      ++failures;
    }
  }
  return failures == 0 ? 0 : 1;
}
