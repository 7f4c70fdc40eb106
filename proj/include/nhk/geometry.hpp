#pragma once

// Rotationally symmetric model manifolds dr^2 + f(r)^2 g_{S^{n-1}} with a pole at
// r = 0 and boundary at r = r_max, together with the curvature/convexity
// certificate and the volume quantities the heat-kernel bounds consume.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "nhk/error.hpp"
#include "nhk/numerics.hpp"

namespace nhk {

/// Warp of the round sphere of Ricci curvature rho0: f(r) = sin(kappa r) / kappa,
/// kappa = sqrt(rho0 / (n - 1)).
struct RoundProfile {
  int n = 2;
  double rho0 = 1.0;

  double kappa() const { return std::sqrt(rho0 / (n - 1)); }
  double value(double r) const { return std::sin(kappa() * r) / kappa(); }
  double d1(double r) const { return std::cos(kappa() * r); }
  double d2(double r) const { return -kappa() * std::sin(kappa() * r); }
  double one_minus_d1_sq(double r) const {
    const double s = std::sin(kappa() * r);
    return s * s;
  }
};

/// C^2 cubic spline through uniformly spaced samples of f on [0, r_max].
///
/// The spline is built on the odd extension of the data to [-r_max, r_max], so
/// f''(0) = 0 holds exactly and the curvature ratios stay bounded at the pole.
/// End slopes at +-r_max come from a fourth-order one-sided difference.
class SplineProfile {
 public:
  SplineProfile(std::vector<double> samples, double r_max) : samples_(std::move(samples)), r_max_(r_max) {
    if (samples_.size() < 5) throw DomainError("warped profile needs at least 5 samples");
    if (!(r_max_ > 0.0)) throw DomainError("warped profile needs r_max > 0");
    const std::size_t s = samples_.size();
    h_ = r_max_ / static_cast<double>(s - 1);
    // odd extension: nodes x_i = -r_max + i h, i = 0 .. 2(s-1)
    const std::size_t m = 2 * s - 1;
    y_.resize(m);
    for (std::size_t i = 0; i < s; ++i) {
      y_[s - 1 + i] = samples_[i];
      y_[s - 1 - i] = -samples_[i];
    }
    const double* f = samples_.data();
    const std::size_t e = s - 1;
    const double slope_end =
        (25.0 * f[e] - 48.0 * f[e - 1] + 36.0 * f[e - 2] - 16.0 * f[e - 3] + 3.0 * f[e - 4]) / (12.0 * h_);
    m_ = clamped_second_derivatives(y_, h_, slope_end, slope_end);
  }

  double value(double r) const { return eval(r, 0); }
  double d1(double r) const { return eval(r, 1); }
  double d2(double r) const { return eval(r, 2); }
  double one_minus_d1_sq(double r) const {
    const double d = d1(r);
    return (1.0 - d) * (1.0 + d);
  }

  double r_max() const { return r_max_; }
  const std::vector<double>& samples() const { return samples_; }

 private:
  static std::vector<double> clamped_second_derivatives(const std::vector<double>& y, double h, double s0,
                                                        double s1) {
    const std::size_t m = y.size();
    std::vector<double> a(m, h / 6.0), b(m, 2.0 * h / 3.0), c(m, h / 6.0), d(m);
    b[0] = h / 3.0;
    b[m - 1] = h / 3.0;
    d[0] = (y[1] - y[0]) / h - s0;
    d[m - 1] = s1 - (y[m - 1] - y[m - 2]) / h;
    for (std::size_t i = 1; i + 1 < m; ++i) d[i] = (y[i + 1] - 2.0 * y[i] + y[i - 1]) / h;
    // Thomas algorithm; the system is strictly diagonally dominant.
    for (std::size_t i = 1; i < m; ++i) {
      const double w = a[i] / b[i - 1];
      b[i] -= w * c[i - 1];
      d[i] -= w * d[i - 1];
    }
    std::vector<double> out(m);
    out[m - 1] = d[m - 1] / b[m - 1];
    for (std::size_t i = m - 1; i-- > 0;) out[i] = (d[i] - c[i] * out[i + 1]) / b[i];
    return out;
  }

  double eval(double r, int order) const {
    const double x = std::clamp(r, 0.0, r_max_) + r_max_;
    const std::size_t last = y_.size() - 2;
    const std::size_t i = std::min(static_cast<std::size_t>(x / h_), last);
    const double xl = static_cast<double>(i) * h_;
    const double A = (xl + h_ - x) / h_;
    const double B = (x - xl) / h_;
    const double mi = m_[i], mj = m_[i + 1];
    switch (order) {
      case 0:
        return A * y_[i] + B * y_[i + 1] + ((A * A * A - A) * mi + (B * B * B - B) * mj) * h_ * h_ / 6.0;
      case 1:
        return (y_[i + 1] - y_[i]) / h_ - (3.0 * A * A - 1.0) / 6.0 * h_ * mi +
               (3.0 * B * B - 1.0) / 6.0 * h_ * mj;
      default:
        return A * mi + B * mj;
    }
  }

  std::vector<double> samples_;
  double r_max_ = 0.0;
  double h_ = 0.0;
  std::vector<double> y_;
  std::vector<double> m_;
};

/// A compact rotationally symmetric manifold with boundary; immutable after construction.
class WarpedProductModel {
 public:
  using Profile = std::variant<RoundProfile, SplineProfile>;

  WarpedProductModel(int n, Profile warp, double r_max) : n_(n), warp_(std::move(warp)), r_max_(r_max) {
    if (n_ < 2) throw DomainError("dimension must be >= 2");
    if (!(r_max_ > 0.0)) throw DomainError("r_max must be positive");
  }

  int dimension() const { return n_; }
  double r_max() const { return r_max_; }
  const Profile& profile() const { return warp_; }

  double f(double r) const {
    return std::visit([r](const auto& p) { return p.value(r); }, warp_);
  }
  double df(double r) const {
    return std::visit([r](const auto& p) { return p.d1(r); }, warp_);
  }
  double d2f(double r) const {
    return std::visit([r](const auto& p) { return p.d2(r); }, warp_);
  }
  double one_minus_df_sq(double r) const {
    return std::visit([r](const auto& p) { return p.one_minus_d1_sq(r); }, warp_);
  }

  /// Radial weight f^{n-1} of the volume form.
  double weight(double r) const { return std::pow(f(r), n_ - 1); }

  bool is_round() const { return std::holds_alternative<RoundProfile>(warp_); }

  std::optional<double> nominal_curvature() const {
    if (const auto* p = std::get_if<RoundProfile>(&warp_)) return p->rho0;
    return std::nullopt;
  }

  std::optional<double> cap_fraction() const {
    if (const auto* p = std::get_if<RoundProfile>(&warp_)) {
      return r_max_ / (0.5 * std::numbers::pi / p->kappa());
    }
    return std::nullopt;
  }

  /// max f over [0, r_max], used by the angular completeness certificate.
  double max_warp() const {
    if (const auto* p = std::get_if<RoundProfile>(&warp_)) {
      return p->value(std::min(r_max_, 0.5 * std::numbers::pi / p->kappa()));
    }
    double best = 0.0;
    const int grid = 4000;
    for (int i = 0; i <= grid; ++i) best = std::max(best, f(r_max_ * i / grid));
    return best;
  }

 private:
  int n_;
  Profile warp_;
  double r_max_;
};

/// Geodesic cap of the round n-sphere with Ricci curvature rho0, cut at
/// cap_fraction * (pi/2) * sqrt((n-1)/rho0). cap_fraction = 1 is the hemisphere.
inline WarpedProductModel make_round_cap(int n, double rho0, double cap_fraction) {
  if (n < 2) throw DomainError("make_round_cap: n must be >= 2");
  if (!(rho0 > 0.0)) throw DomainError("make_round_cap: rho0 must be positive");
  if (!(cap_fraction > 0.0)) throw DomainError("make_round_cap: cap_fraction must be positive");
  if (cap_fraction > 1.0) {
    throw GeometryError("convex boundary", "make_round_cap: cap_fraction > 1 gives a non-convex boundary");
  }
  const RoundProfile p{n, rho0};
  return WarpedProductModel(n, p, cap_fraction * 0.5 * std::numbers::pi / p.kappa());
}

/// Model from uniformly spaced warp samples f(0) = 0, f(h), ..., f(r_max).
inline WarpedProductModel make_warped(int n, std::vector<double> samples, double r_max) {
  if (samples.empty() || std::abs(samples.front()) > 1e-12) {
    throw DomainError("warped profile must satisfy f(0) = 0");
  }
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (!(samples[i] > 0.0)) throw DomainError("warped profile must be positive on (0, r_max]");
  }
  SplineProfile spline(std::move(samples), r_max);
  if (std::abs(spline.d1(0.0) - 1.0) > 1e-3) {
    throw DomainError("warped profile must satisfy f'(0) = 1 (smooth pole)");
  }
  return WarpedProductModel(n, std::move(spline), r_max);
}

struct GeometryReport {
  double rho_eff = 0.0;
  double pi_min = 0.0;
  double volume = 0.0;
  double diameter = 0.0;
  /// false when the 2 r_max diameter is not backed by a convexity argument (non-round warps).
  bool diameter_certified = true;
};

namespace detail {

inline double ricci_lower(const WarpedProductModel& m, double r) {
  const int n = m.dimension();
  const double f = m.f(r);
  const double ratio = -m.d2f(r) / f;
  const double radial = (n - 1) * ratio;
  const double tangential = ratio + (n - 2) * m.one_minus_df_sq(r) / (f * f);
  return std::min(radial, tangential);
}

}  // namespace detail

/// Geometric quantities without enforcing the hypotheses.
inline GeometryReport measure_geometry(const WarpedProductModel& m) {
  GeometryReport rep;
  const double r_max = m.r_max();

  int grid = 2000;
  if (const auto* s = std::get_if<SplineProfile>(&m.profile())) {
    grid = 10 * static_cast<int>(s->samples().size());
  }
  const auto ric = [&](double r) { return detail::ricci_lower(m, r); };
  double best = std::numeric_limits<double>::infinity();
  int best_i = 1;
  for (int i = 1; i <= grid; ++i) {
    const double v = ric(r_max * i / grid);
    if (v < best) {
      best = v;
      best_i = i;
    }
  }
  const double lo = r_max * (best_i > 1 ? best_i - 1.0 : 0.5) / grid;
  const double hi = r_max * std::min(best_i + 1, grid) / grid;
  const double polished = ric(numerics::golden_minimize(ric, lo, hi, 1e-13 * r_max));
  rep.rho_eff = std::min(best, polished);

  rep.pi_min = m.df(r_max) / m.f(r_max);
  const int n = m.dimension();
  rep.volume = numerics::unit_sphere_volume(n - 1) *
               numerics::adaptive_simpson([&](double r) { return m.weight(r); }, 0.0, r_max, 1e-12);
  rep.diameter = 2.0 * r_max;
  rep.diameter_certified = m.is_round();
  return rep;
}

/// Certified Ricci lower bound, boundary convexity, volume and diameter.
/// Throws GeometryError naming the failed hypothesis.
inline GeometryReport curvature_report(const WarpedProductModel& m) {
  GeometryReport rep = measure_geometry(m);
  if (!(rep.rho_eff > 0.0)) {
    throw GeometryError("Ric >= rho > 0",
                        "hypothesis violated: certified Ricci lower bound " + std::to_string(rep.rho_eff) +
                            " is not positive");
  }
  // f'(r_max) = 0 exactly at the hemisphere; tolerate rounding of cos(pi/2).
  if (rep.pi_min < -1e-12) {
    throw GeometryError("convex boundary", "hypothesis violated: second fundamental form minimum " +
                                               std::to_string(rep.pi_min) + " is negative");
  }
  rep.pi_min = std::max(rep.pi_min, 0.0);
  return rep;
}

/// Diameter pi sqrt((n-1)/rho) of the comparison sphere.
inline double comparison_diameter(double rho, int n) { return std::numbers::pi * std::sqrt((n - 1) / rho); }

/// V_rho(s) = int_0^s sin^{n-1}(sqrt(rho/(n-1)) u) du.
inline double comparison_volume(double rho, int n, double s) {
  if (!(rho > 0.0) || n < 2) throw DomainError("comparison_volume: need rho > 0, n >= 2");
  const double dmax = comparison_diameter(rho, n);
  if (!(s >= 0.0) || s > dmax * (1.0 + 1e-12)) {
    throw DomainError("comparison_volume: s outside [0, pi sqrt((n-1)/rho)]");
  }
  s = std::min(s, dmax);
  if (s == 0.0) return 0.0;
  const double kappa = std::sqrt(rho / (n - 1));
  const auto g = [&](double u) { return std::pow(std::sin(kappa * u), n - 1); };
  double v = numerics::adaptive_simpson(g, 0.0, s, 1e-12);
  // tighten for small values so relative accuracy survives the large-k regime
  if (v < 1e-2) v = numerics::adaptive_simpson(g, 0.0, s, std::max(v * 1e-13, 1e-300));
  return v;
}

/// Inverse of comparison_volume on [0, V_rho(pi sqrt((n-1)/rho))].
inline double comparison_volume_inverse(double rho, int n, double v) {
  const double dmax = comparison_diameter(rho, n);
  const double vmax = comparison_volume(rho, n, dmax);
  if (!(v >= 0.0) || v > vmax * (1.0 + 1e-12)) {
    throw DomainError("comparison_volume_inverse: v outside [0, V_rho(max)]");
  }
  if (v == 0.0) return 0.0;
  if (v >= vmax) return dmax;
  return numerics::bisect_increasing([&](double s) { return comparison_volume(rho, n, s); }, v, 0.0, dmax);
}

/// A point (r, theta) with theta an angle along one great circle of S^{n-1}.
struct PolarPoint {
  double r = 0.0;
  double theta = 0.0;
};

/// Intrinsic distance on a round cap (caps with cap_fraction <= 1 are geodesically convex).
inline double geodesic_distance(const WarpedProductModel& m, PolarPoint x, PolarPoint y) {
  const auto* p = std::get_if<RoundProfile>(&m.profile());
  if (p == nullptr) throw UnsupportedError("geodesic_distance: only round caps are supported");
  const double k = p->kappa();
  const double a = k * x.r, b = k * y.r;
  const double sa = std::sin(0.5 * (a - b));
  const double st = std::sin(0.5 * (x.theta - y.theta));
  const double hav = std::clamp(sa * sa + std::sin(a) * std::sin(b) * st * st, 0.0, 1.0);
  return 2.0 * std::asin(std::sqrt(hav)) / k;
}

/// mu(B(pole, radius)): a sub-cap, so a radial integral.
inline double ball_volume_at_pole(const WarpedProductModel& m, double radius) {
  const double R = std::clamp(radius, 0.0, m.r_max());
  return numerics::unit_sphere_volume(m.dimension() - 1) *
         numerics::adaptive_simpson([&](double r) { return m.weight(r); }, 0.0, R, 1e-12);
}

}  // namespace nhk
