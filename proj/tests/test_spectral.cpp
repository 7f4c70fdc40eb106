#include <cmath>
#include <cstdlib>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "nhk/spectral.hpp"

namespace {

using namespace nhk;
constexpr double kPi = std::numbers::pi;

const SpectrumTable& hemisphere() {
  static const SpectrumTable s = [] {
    const auto m = make_round_cap(2, 1.0, 1.0);
    return assemble_spectrum(m, curvature_report(m).rho_eff, 40, 2000);
  }();
  return s;
}

const SpectrumTable& cap060() {
  static const SpectrumTable s = [] {
    const auto m = make_round_cap(2, 1.0, 0.6);
    return assemble_spectrum(m, curvature_report(m).rho_eff, 40, 2000);
  }();
  return s;
}

// Neumann spectrum of the unit hemisphere: L(L+1) with multiplicity L+1.
double hemisphere_trace(double t) {
  double acc = 0.0;
  for (int L = 200; L >= 0; --L) acc += (L + 1) * std::exp(-L * (L + 1.0) * t);
  return acc;
}

TEST(AngularMultiplicity, Fixtures) {
  for (int l = 0; l < 10; ++l) EXPECT_EQ(angular_multiplicity(3, l), 2 * l + 1);
  EXPECT_EQ(angular_multiplicity(2, 0), 1);
  EXPECT_EQ(angular_multiplicity(2, 5), 2);
  EXPECT_EQ(angular_multiplicity(4, 2), 9);
  EXPECT_THROW(angular_multiplicity(1, 0), DomainError);
  EXPECT_THROW(angular_multiplicity(3, -1), DomainError);
}

// Independent oracle: dim of degree-l homogeneous harmonic polynomials in m = n variables
// equals C(l+m-1, m-1) - C(l+m-3, m-1).
TEST(AngularMultiplicity, MatchesHarmonicPolynomialCount) {
  const auto binom = [](int a, int b) -> long long {
    if (b < 0 || a < b) return 0;
    long double r = 1.0L;
    for (int i = 1; i <= b; ++i) r = r * (a - b + i) / i;
    return std::llround(r);
  };
  for (int n = 3; n <= 9; ++n) {
    for (int l = 0; l <= 12; ++l) {
      const long long count = binom(l + n - 1, n - 1) - binom(l + n - 3, n - 1);
      ASSERT_EQ(angular_multiplicity(n, l), count) << "n=" << n << " l=" << l;
    }
  }
}

TEST(RadialModes, HemisphereSectors) {
  const auto m = make_round_cap(2, 1.0, 1.0);
  const std::vector<std::vector<double>> expected{{0, 6, 20}, {2, 12, 30}, {6, 20}};
  for (int l = 0; l < 3; ++l) {
    const auto modes = solve_radial_modes(m, l, 2000, static_cast<int>(expected[l].size()));
    ASSERT_EQ(modes.size(), expected[l].size());
    for (std::size_t j = 0; j < modes.size(); ++j) {
      EXPECT_EQ(modes[j].l, l);
      EXPECT_EQ(modes[j].j, static_cast<int>(j));
      if (expected[l][j] == 0.0) {
        EXPECT_EQ(modes[j].lambda, 0.0);
      } else {
        EXPECT_NEAR(modes[j].lambda / expected[l][j], 1.0, 1e-5) << "l=" << l << " j=" << j;
      }
    }
  }
}

TEST(RadialModes, ThreeHemisphere) {
  // unit S^3 hemisphere (rho0 = 2): L(L+2), sector l keeps L - l even
  const auto m = make_round_cap(3, 2.0, 1.0);
  const auto l0 = solve_radial_modes(m, 0, 2000, 3);
  const auto l1 = solve_radial_modes(m, 1, 2000, 2);
  EXPECT_NEAR(l0[1].lambda, 8.0, 1e-3);
  EXPECT_NEAR(l0[2].lambda, 24.0, 3e-3);
  EXPECT_NEAR(l1[0].lambda, 3.0, 1e-3);
  EXPECT_NEAR(l1[1].lambda, 15.0, 2e-3);
}

TEST(RadialModes, ModesAreOrthonormal) {
  const auto& s = hemisphere();
  const auto& mesh = s.mesh();
  std::vector<std::size_t> l0;
  for (std::size_t i = 0; i < s.modes().size() && l0.size() < 6; ++i) {
    if (s.modes()[i].l == 0) l0.push_back(i);
  }
  for (std::size_t a : l0) {
    for (std::size_t b : l0) {
      const double ip = mesh.inner(s.modes()[a].u, s.modes()[b].u);
      EXPECT_NEAR(ip, a == b ? 1.0 : 0.0, 1e-10);
    }
  }
}

TEST(RadialModes, RejectsBadArguments) {
  const auto m = make_round_cap(2, 1.0, 1.0);
  EXPECT_THROW(solve_radial_modes(m, 0, 2000, 0), DomainError);
  EXPECT_THROW(solve_radial_modes(m, -1, 2000, 1), DomainError);
  EXPECT_THROW(solve_radial_modes(m, 0, 10, 1), DomainError);
}

TEST(Spectrum, HemisphereFirstTenSorted) {
  const double expected[] = {0, 2, 2, 6, 6, 6, 12, 12, 12, 12};
  const auto& s = hemisphere();
  EXPECT_EQ(s.eigenvalue(0), 0.0);
  for (int k = 1; k < 10; ++k) EXPECT_NEAR(s.eigenvalue(k) / expected[k], 1.0, 1e-4) << "k = " << k;
  EXPECT_NEAR(s.volume(), 2 * kPi, 1e-10);
}

TEST(Spectrum, CertifiedRangeAndMultiplicities) {
  const auto& s = hemisphere();
  EXPECT_DOUBLE_EQ(s.truncation().lambda_cut, 41.0 * 41.0);
  // every L with L(L+1) < 1681 appears with multiplicity L+1
  std::size_t expected = 0;
  for (int L = 0; L * (L + 1) < 1681; ++L) expected += L + 1;
  EXPECT_EQ(s.sorted().size(), expected);
  EXPECT_THROW(s.eigenvalue(s.sorted().size()), TruncationError);
  for (std::size_t k = 1; k < s.sorted().size(); ++k) ASSERT_LE(s.eigenvalue(k - 1), s.eigenvalue(k));
}

TEST(Spectrum, FixedModesPerSector) {
  const auto m = make_round_cap(2, 1.0, 1.0);
  const auto s = assemble_spectrum(m, 1.0, 5, 400, 3);
  // the third l = 0 mode (20) caps the certified range: 0, 6 | 2, 12 | 6 | 12
  EXPECT_NEAR(s.truncation().lambda_cut, 20.0, 1e-3);
  EXPECT_EQ(s.modes().size(), 6u);
  EXPECT_NEAR(s.eigenvalue(1), 2.0, 1e-3);
}

TEST(Spectrum, QuarterCapSelfConvergence) {
  const auto m = make_round_cap(2, 1.0, 0.5);
  const double rho = curvature_report(m).rho_eff;
  const double a = assemble_spectrum(m, rho, 10, 2000).eigenvalue(1);
  const double b = assemble_spectrum(m, rho, 10, 4000).eigenvalue(1);
  EXPECT_NEAR(a / b, 1.0, 1e-4);
}

TEST(Spectrum, ThreadCountDoesNotChangeResults) {
  const auto m = make_round_cap(2, 1.0, 0.8);
  setenv("NHK_THREADS", "1", 1);
  const auto a = assemble_spectrum(m, 1.0, 12, 500);
  setenv("NHK_THREADS", "4", 1);
  const auto b = assemble_spectrum(m, 1.0, 12, 500);
  unsetenv("NHK_THREADS");
  ASSERT_EQ(a.sorted().size(), b.sorted().size());
  for (std::size_t k = 0; k < a.sorted().size(); ++k) ASSERT_EQ(a.eigenvalue(k), b.eigenvalue(k));
}

// Mesh doubling: error ratio of a second-order scheme.
TEST(Spectrum, SecondOrderConvergenceHemisphere) {
  const auto m = make_round_cap(2, 1.0, 1.0);
  for (int l : {0, 1, 3}) {
    const double exact = (l == 0) ? 6.0 : (l == 1 ? 2.0 : 12.0);
    const int j = (l == 0) ? 1 : 0;
    const double e1 = std::abs(solve_radial_modes(m, l, 250, j + 1)[j].lambda - exact);
    const double e2 = std::abs(solve_radial_modes(m, l, 500, j + 1)[j].lambda - exact);
    EXPECT_GE(e1 / e2, 3.0) << "l = " << l;
    EXPECT_LE(e1 / e2, 5.0) << "l = " << l;
  }
}

TEST(Spectrum, SecondOrderConvergenceCap060) {
  const auto m = make_round_cap(2, 1.0, 0.6);
  for (int l : {0, 2}) {
    const int j = (l == 0) ? 1 : 0;
    const double a = solve_radial_modes(m, l, 250, j + 1)[j].lambda;
    const double b = solve_radial_modes(m, l, 500, j + 1)[j].lambda;
    const double c = solve_radial_modes(m, l, 1000, j + 1)[j].lambda;
    const double ratio = (a - b) / (b - c);
    EXPECT_GE(ratio, 3.0) << "l = " << l;
    EXPECT_LE(ratio, 5.0) << "l = " << l;
  }
}

TEST(HeatTrace, HemisphereClosedForm) {
  const auto& s = hemisphere();
  EXPECT_NEAR(heat_trace(s, 1.0).value, 1.278131, 1e-4);
  EXPECT_NEAR(heat_trace(s, 1.0).value, hemisphere_trace(1.0), 1e-6);
  EXPECT_NEAR(heat_trace(s, 2.0).value, hemisphere_trace(2.0), 1e-6);
  EXPECT_NEAR(heat_trace(s, 2.0).value, 1.036650, 1e-6);
  EXPECT_NEAR(heat_trace(s, 0.05).value, hemisphere_trace(0.05), 1e-4 * hemisphere_trace(0.05));
  EXPECT_NEAR(heat_trace(s, 50.0).value, 1.0, 1e-12);
}

TEST(HeatTrace, TailBoundAndWarning) {
  const auto& s = hemisphere();
  const TraceValue tv = heat_trace(s, 0.5);
  EXPECT_FALSE(tv.truncation_warning);
  EXPECT_LT(tv.tail_bound, 1e-100);
  // the bound really dominates the omitted part of the closed-form series
  const double omitted = hemisphere_trace(0.002) - heat_trace(s, 0.002).value;
  const TraceValue small = heat_trace(s, 0.002);
  EXPECT_GE(small.tail_bound, omitted);
  EXPECT_TRUE(small.truncation_warning);
  EXPECT_THROW(heat_trace(s, 0.0), DomainError);
}

TEST(HeatKernel, TraceIdentityByRadialQuadrature) {
  for (const SpectrumTable* sp : {&hemisphere(), &cap060()}) {
    const auto& s = *sp;
    const double t = 0.7;
    const double R = s.mesh().r_max;
    // composite Simpson in r on 400 panels of omega * p(t, r, r) sin r
    const int N = 400;
    double acc = 0.0;
    for (int i = 0; i <= N; ++i) {
      const double r = R * i / N;
      const ModeSamples x(s, r);
      const double w = (i == 0 || i == N) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      acc += w * heat_kernel(s, x, x, 0.0, t).value * std::sin(r);
    }
    acc *= 2 * kPi * R / (3.0 * N);
    EXPECT_NEAR(acc, heat_trace(s, t).value, 1e-6);
  }
}

TEST(HeatKernel, EquilibriumLimit) {
  const auto& s = hemisphere();
  for (double r : {0.0, 0.4, kPi / 2}) {
    EXPECT_NEAR(heat_kernel(s, PolarPoint{r, 0.0}, PolarPoint{r, 0.0}, 40.0).value, 1.0 / (2 * kPi), 1e-10);
  }
}

TEST(HeatKernel, PoleValueStableUnderRefinement) {
  const auto m = make_round_cap(2, 1.0, 1.0);
  const auto fine = assemble_spectrum(m, 1.0, 60, 4000);
  const double a = heat_kernel(hemisphere(), PolarPoint{0, 0}, PolarPoint{0, 0}, 1.0).value;
  const double b = heat_kernel(fine, PolarPoint{0, 0}, PolarPoint{0, 0}, 1.0).value;
  EXPECT_NEAR(a / b, 1.0, 1e-4);
}

// Integrating p(t, x, .) over the surface in (r, theta) gives 1; symmetric and positive.
TEST(HeatKernel, StochasticCompletenessSymmetryPositivity) {
  const auto& s = hemisphere();
  const double t = 0.3;
  const PolarPoint x{0.6, 0.0};
  const int nr = 200, nt = 128;
  const double R = s.mesh().r_max;
  const ModeSamples xs(s, x.r);
  double acc = 0.0;
  for (int i = 0; i <= nr; ++i) {
    const double r = R * i / nr;
    const ModeSamples ys(s, r);
    double ring = 0.0;
    for (int j = 0; j < nt; ++j) {
      const double th = 2 * kPi * j / nt;
      const double p = heat_kernel(s, xs, ys, th, t).value;
      ASSERT_GT(p, 0.0);
      ring += p;
    }
    const double w = (i == 0 || i == nr) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    acc += w * ring * (2 * kPi / nt) * std::sin(r);
  }
  acc *= R / (3.0 * nr);
  EXPECT_NEAR(acc, 1.0, 1e-6);

  const PolarPoint y{1.3, 2.1};
  EXPECT_NEAR(heat_kernel(s, x, y, t).value, heat_kernel(s, y, x, t).value, 1e-12);
}

TEST(HeatKernel, OffMeridianRequiresSurface) {
  const auto m = make_round_cap(3, 2.0, 1.0);
  const auto s = assemble_spectrum(m, 2.0, 6, 300);
  EXPECT_THROW(heat_kernel(s, PolarPoint{0.5, 0.0}, PolarPoint{0.5, 1.0}, 1.0), UnsupportedError);
  EXPECT_NO_THROW(heat_kernel(s, PolarPoint{0.5, 0.0}, PolarPoint{0.9, 0.0}, 1.0));
  EXPECT_THROW(heat_kernel(s, PolarPoint{0.5, 0.0}, PolarPoint{0.9, 0.0}, 0.0), DomainError);
}

std::vector<double> on_mesh(const SpectrumTable& s, double (*g)(double)) {
  std::vector<double> v;
  for (double r : s.mesh().nodes) v.push_back(g(r));
  return v;
}

TEST(Semigroup, ConstantsAreInvariant) {
  const auto& s = hemisphere();
  const std::vector<double> one(s.mesh().points, 1.0);
  for (double t : {0.0, 0.1, 2.0}) {
    for (double r : {0.0, 0.7, kPi / 2}) {
      const auto v = apply_semigroup_radial(s, one, t, r);
      EXPECT_NEAR(v.value, 1.0, 1e-10);
      EXPECT_NEAR(v.dr, 0.0, 1e-8);
      EXPECT_NEAR(v.laplacian, 0.0, 1e-8);
    }
  }
}

TEST(Semigroup, IdentityAtTimeZero) {
  const auto& s = hemisphere();
  const auto f = on_mesh(s, [](double r) { return 2.0 + std::cos(2.0 * r) * 0.5; });
  for (double r : {0.1, 0.8, 1.5}) {
    EXPECT_NEAR(apply_semigroup_radial(s, f, 0.0, r).value, 2.0 + 0.5 * std::cos(2.0 * r), 1e-4);
  }
}

TEST(Semigroup, HeatEquationFiniteDifference) {
  for (const SpectrumTable* sp : {&hemisphere(), &cap060()}) {
    const auto& s = *sp;
    const double R = s.mesh().r_max;
    std::vector<double> f;
    for (double r : s.mesh().nodes) f.push_back(1.0 + 0.5 * std::pow(std::cos(0.5 * kPi * r / R), 2));
    const RadialSemigroup P(s, f);
    const double h = 1e-4;
    for (double t : {0.05, 0.3, 1.0}) {
      for (double r : {0.0, 0.5 * R, R}) {
        const double dt = (P.at(t + h, r).value - P.at(t - h, r).value) / (2 * h);
        const double lap = P.at(t, r).laplacian;
        EXPECT_LE(std::abs(dt - lap), 1e-5 * std::max(std::abs(lap), 1e-3)) << "t=" << t << " r=" << r;
      }
    }
  }
}

TEST(Semigroup, SemigroupProperty) {
  for (const SpectrumTable* sp : {&hemisphere(), &cap060()}) {
    const auto& s = *sp;
    std::vector<double> f;
    for (double r : s.mesh().nodes) f.push_back(1.0 + r * r);
    const RadialSemigroup P(s, f);
    const double t = 0.2, u = 0.35;
    const RadialSemigroup Q(s, P.on_mesh(t));
    for (double r : {0.0, 0.3, s.mesh().r_max}) {
      EXPECT_NEAR(Q.at(u, r).value, P.at(t + u, r).value, 1e-8);
    }
  }
}

TEST(Semigroup, RejectsNonPositiveInput) {
  const auto& s = hemisphere();
  std::vector<double> f(s.mesh().points, 1.0);
  f[10] = 0.0;
  EXPECT_THROW(apply_semigroup_radial(s, f, 0.1, 0.2), DomainError);
  EXPECT_THROW(RadialSemigroup(s, std::vector<double>(5, 1.0)), DomainError);
}

}  // namespace
