#pragma once

// Closed-form heat-kernel and eigenvalue bounds on a compact manifold with
// Ric >= rho > 0 and convex boundary. Every evaluator depends only on the
// scalars (n, rho, mu(M), D(M)); large exponents are handled in log space.

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

#include "nhk/error.hpp"
#include "nhk/geometry.hpp"

namespace nhk {

struct BoundInputs {
  int n = 2;
  double rho = 1.0;
  double mu = 0.0;
  double diam = 0.0;

  void validate() const {
    if (n < 2) throw DomainError("BoundInputs: n must be >= 2");
    if (!(rho > 0.0) || !(mu > 0.0) || !(diam > 0.0)) {
      throw DomainError("BoundInputs: rho, mu and diam must be positive");
    }
  }
};

namespace detail {

inline void require_dim_rho(int n, double rho) {
  if (n < 2) throw DomainError("n must be >= 2");
  if (!(rho > 0.0)) throw DomainError("rho must be positive");
}

/// 1 - e^{-2 rho t / 3}
inline double one_minus_decay(double rho, double t) { return -std::expm1(-2.0 * rho * t / 3.0); }

}  // namespace detail

/// Coefficients of the gradient estimate |grad ln P_t f|^2 <= a Delta P_t f / P_t f + b.
struct LiYauCoeffs {
  double a = 0.0;
  double b = 0.0;
};

inline LiYauCoeffs liyau_coeffs(int n, double rho, double t) {
  detail::require_dim_rho(n, rho);
  if (!(t > 0.0)) throw DomainError("liyau_coeffs: t must be positive");
  const double x = 2.0 * rho * t / 3.0;
  return {std::exp(-x), (n * rho / 3.0) * std::exp(-2.0 * x) / -std::expm1(-x)};
}

/// Harnack factor H with P_s f(x) <= H P_t f(y), d = d(x, y).
///
/// s = 0 gives +infinity: the factor genuinely diverges there.
inline double harnack_factor(int n, double rho, double s, double t, double d) {
  detail::require_dim_rho(n, rho);
  if (!(s >= 0.0) || !(s < t)) throw DomainError("harnack_factor: need 0 <= s < t");
  if (!(d >= 0.0)) throw DomainError("harnack_factor: d must be >= 0");
  if (s == 0.0) return std::numeric_limits<double>::infinity();
  const double log_power = 0.5 * n * (std::log(detail::one_minus_decay(rho, t)) -
                                      std::log(detail::one_minus_decay(rho, s)));
  // e^{2 rho t/3} - e^{2 rho s/3} = e^{2 rho s/3} (e^{2 rho (t-s)/3} - 1)
  const double gap = std::exp(2.0 * rho * s / 3.0) * std::expm1(2.0 * rho * (t - s) / 3.0);
  return std::exp(log_power + (rho / 6.0) * d * d / gap);
}

struct OnDiagonalBounds {
  double lower = 0.0;
  double upper = 0.0;
};

/// Sandwich (rho/6pi)^{n/2} (1-e^{-2rho t/3})^{-n/2} <= p(t,x,x) <= mu^{-1} (1-e^{-2rho t/3})^{-n/2}.
inline OnDiagonalBounds ondiag_bounds(int n, double rho, double mu, double t) {
  detail::require_dim_rho(n, rho);
  if (!(mu > 0.0)) throw DomainError("ondiag_bounds: mu must be positive");
  if (!(t > 0.0)) throw DomainError("ondiag_bounds: t must be positive");
  const double log_decay = std::log(detail::one_minus_decay(rho, t));
  const double half = 0.5 * n;
  return {std::exp(half * (std::log(rho / (6.0 * std::numbers::pi)) - log_decay)),
          std::exp(-half * log_decay) / mu};
}

enum class RefinedBranch { small_time, large_time };

inline const char* to_string(RefinedBranch b) {
  return b == RefinedBranch::small_time ? "small_time" : "large_time";
}

struct RefinedUpper {
  double value = 0.0;
  RefinedBranch branch = RefinedBranch::large_time;
  double r_of_t = 0.0;
  double tau = 0.0;
  /// sqrt(r(t)) exceeded the comparison diameter and V_rho was clamped at its maximum.
  bool clamped = false;
};

/// r(t) = (3n/rho)(e^{4 rho t/3} - e^{2 rho t/3}).
inline double refined_radius_sq(int n, double rho, double t) {
  const double x = 2.0 * rho * t / 3.0;
  return (3.0 * n / rho) * std::exp(x) * std::expm1(x);
}

/// Switching time tau = (3/2rho) ln((1 + sqrt(1 + 4 rho D^2/(3n)))/2).
inline double refined_switch_time(int n, double rho, double diam) {
  const double x = 4.0 * rho * diam * diam / (3.0 * n);
  // (1 + sqrt(1+x))/2 = 1 + x / (2 (1 + sqrt(1+x)))
  return 1.5 / rho * std::log1p(x / (2.0 * (1.0 + std::sqrt(1.0 + x))));
}

/// Prefactor (1 + e^{-2 rho t/3})^{n/2} e^{n/2} / mu shared by both branches.
inline double ball_upper_prefactor(int n, double rho, double mu, double t) {
  return std::exp(0.5 * n * (std::log1p(std::exp(-2.0 * rho * t / 3.0)) + 1.0)) / mu;
}

/// On-diagonal upper bound through the diameter and Bishop-Gromov comparison.
inline RefinedUpper refined_upper(int n, double rho, double mu, double diam, double t) {
  BoundInputs{n, rho, mu, diam}.validate();
  if (!(t > 0.0)) throw DomainError("refined_upper: t must be positive");
  RefinedUpper out;
  out.tau = refined_switch_time(n, rho, diam);
  out.r_of_t = refined_radius_sq(n, rho, t);
  const double base = ball_upper_prefactor(n, rho, mu, t);
  if (t >= out.tau) {
    out.branch = RefinedBranch::large_time;
    out.value = base;
    return out;
  }
  out.branch = RefinedBranch::small_time;
  const double dmax = comparison_diameter(rho, n);
  double radius = std::sqrt(out.r_of_t);
  if (radius > dmax) {
    radius = dmax;
    out.clamped = true;
  }
  const double vd = comparison_volume(rho, n, std::min(diam, dmax));
  out.value = base * vd / comparison_volume(rho, n, radius);
  return out;
}

struct TraceBounds {
  double lower = 0.0;
  double upper = 0.0;
};

/// (rho/6pi)^{n/2} mu (1-e^{-2rho t/3})^{-n/2} <= sum_k e^{-lambda_k t} <= (1-e^{-2rho t/3})^{-n/2}.
inline TraceBounds trace_bounds(int n, double rho, double mu, double t) {
  const OnDiagonalBounds d = ondiag_bounds(n, rho, mu, t);
  return {d.lower * mu, d.upper * mu};
}

/// log(2^{n/2} e^n - e^{n/2}); the second eigenvalue bound holds for k above this threshold.
inline double log_bound2_threshold(int n) {
  const double half = 0.5 * n;
  // 2^{n/2} e^n - e^{n/2} = 2^{n/2} e^n (1 - 2^{-n/2} e^{-n/2})
  return half * std::log(2.0) + n + std::log1p(-std::exp(-half * (std::log(2.0) + 1.0)));
}

inline bool bound2_valid(int n, double k) {
  if (!(k > 0.0)) return false;
  return std::log(k) > log_bound2_threshold(n);
}

struct EigenLowerBounds {
  double bound1 = 0.0;
  std::optional<double> bound2;
};

/// First lower bound: -n rho / (3 ln(1 - (1 + e^{-n/2} k)^{-2/n})); 0 at k = 0.
inline double eigen_bound1(int n, double rho, double k) {
  detail::require_dim_rho(n, rho);
  if (!(k >= 0.0)) throw DomainError("eigen_bound1: k must be >= 0");
  if (k == 0.0) return 0.0;
  const double log_inner = std::log1p(k * std::exp(-0.5 * n)) * (2.0 / n);
  // 1 - exp(-log_inner)
  const double gap = -std::expm1(-log_inner);
  return -n * rho / (3.0 * std::log(gap));
}

/// Second lower bound, present only for k > 2^{n/2} e^n - e^{n/2}.
inline std::optional<double> eigen_bound2(int n, double rho, double diam, double k) {
  detail::require_dim_rho(n, rho);
  if (!(diam > 0.0)) throw DomainError("eigen_bound2: diam must be positive");
  if (!bound2_valid(n, k)) return std::nullopt;
  const double dmax = comparison_diameter(rho, n);
  const double vd = comparison_volume(rho, n, std::min(diam, dmax));
  const double half = 0.5 * n;
  const double log_v = half * (std::log(2.0) + 1.0) - std::log1p(k * std::exp(-half)) + std::log(vd);
  const double s = comparison_volume_inverse(rho, n, std::exp(log_v));
  const double x = 4.0 * rho / (3.0 * n) * s * s;
  const double denom = std::log1p(x / (2.0 * (1.0 + std::sqrt(1.0 + x))));
  return n * rho / (3.0 * denom);
}

inline EigenLowerBounds eigen_lower_bounds(int n, double rho, double diam, double k) {
  return {eigen_bound1(n, rho, k), eigen_bound2(n, rho, diam, k)};
}

struct Asymptotics {
  /// (n rho / 3e) k^{2/n}
  double lb1_asym = 0.0;
  /// (n / 2e^2) (n rho/(n-1))^{1-1/n} (k / V_rho(D))^{2/n}, as stated alongside the bound.
  double lb2_asym = 0.0;
  /// Leading term of eigen_bound2 from V_rho(s) ~ kappa^{n-1} s^n / n:
  /// (n / 2e^2) n^{1-2/n} (rho/(n-1))^{1-1/n} (k / V_rho(D))^{2/n} = n^{-1/n} lb2_asym.
  double lb2_leading = 0.0;
  /// Weyl law: ((4 pi)^{n/2} Gamma(1 + n/2) k / mu)^{2/n}.
  double weyl = 0.0;
};

inline Asymptotics asymptotics(int n, double rho, double mu, double diam, double k) {
  BoundInputs{n, rho, mu, diam}.validate();
  if (!(k >= 1.0)) throw DomainError("asymptotics: k must be >= 1");
  const double nd = n;
  const double e = std::numbers::e;
  const double vd = comparison_volume(rho, n, std::min(diam, comparison_diameter(rho, n)));
  Asymptotics a;
  a.lb1_asym = nd * rho / (3.0 * e) * std::pow(k, 2.0 / nd);
  const double shape = std::pow(k / vd, 2.0 / nd) * nd / (2.0 * e * e);
  a.lb2_asym = shape * std::pow(nd * rho / (nd - 1.0), 1.0 - 1.0 / nd);
  a.lb2_leading = shape * std::pow(nd, 1.0 - 2.0 / nd) * std::pow(rho / (nd - 1.0), 1.0 - 1.0 / nd);
  const double log_weyl =
      (2.0 / nd) * (0.5 * nd * std::log(4.0 * std::numbers::pi) + std::lgamma(1.0 + 0.5 * nd) + std::log(k) -
                    std::log(mu));
  a.weyl = std::exp(log_weyl);
  return a;
}

struct VolumeBounds {
  double paper_bound = 0.0;   // (6 pi / rho)^{n/2}
  double bishop_bound = 0.0;  // |S^n| ((n-1)/rho)^{n/2}
  double ratio = 0.0;
  double log_ratio = 0.0;
};

inline VolumeBounds volume_bounds(int n, double rho) {
  detail::require_dim_rho(n, rho);
  const double half = 0.5 * n;
  const double log_paper = half * std::log(6.0 * std::numbers::pi / rho);
  const double log_bishop = numerics::log_unit_sphere_volume(n) + half * std::log((n - 1) / rho);
  VolumeBounds v;
  v.paper_bound = std::exp(log_paper);
  v.bishop_bound = std::exp(log_bishop);
  v.log_ratio = log_paper - log_bishop;
  v.ratio = std::exp(v.log_ratio);
  return v;
}

}  // namespace nhk
