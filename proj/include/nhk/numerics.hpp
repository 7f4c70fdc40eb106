#pragma once

// Small numerical kernels shared by the geometry, spectral and bound modules.

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>

#include "nhk/error.hpp"

namespace nhk::numerics {

namespace detail {

template <typename F>
double simpson_step(const F& f, double a, double b, double fa, double fm, double fb,
                    double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Adaptive Simpson quadrature of f over [a, b] to absolute tolerance `tol`.
///
/// The interval is first split into `panels` equal pieces so that integrands
/// with interior structure are not mistaken for converged on the first pass.
template <typename F>
double adaptive_simpson(const F& f, double a, double b, double tol = 1e-12, int panels = 8,
                        int max_depth = 48) {
  if (b == a) return 0.0;
  const double width = (b - a) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * width;
    const double hi = (p + 1 == panels) ? b : lo + width;
    const double flo = f(lo);
    const double fhi = f(hi);
    const double fmid = f(0.5 * (lo + hi));
    const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
    total += detail::simpson_step(f, lo, hi, flo, fmid, fhi, whole, tol / panels, max_depth);
  }
  return total;
}

/// Bisection for an increasing function g on [lo, hi] with g(lo) <= target <= g(hi).
/// Stops when the bracket has collapsed to a few ulps or the residual is within `residual_tol`.
template <typename F>
double bisect_increasing(const F& g, double target, double lo, double hi,
                         double residual_tol = 0.0, int max_iter = 400) {
  for (int it = 0; it < max_iter; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double gm = g(mid);
    if (std::abs(gm - target) <= residual_tol) return mid;
    if (gm < target) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(hi)) break;
  }
  return 0.5 * (lo + hi);
}

/// Golden-section minimization of f on [a, b].
template <typename F>
double golden_minimize(const F& f, double a, double b, double tol = 1e-12, int max_iter = 200) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < max_iter && (b - a) > tol; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return fc < fd ? c : d;
}

/// log of the volume of the unit k-sphere S^k in R^{k+1}: 2 pi^{(k+1)/2} / Gamma((k+1)/2).
inline double log_unit_sphere_volume(int k) {
  const double half = 0.5 * (k + 1);
  return std::log(2.0) + half * std::log(std::numbers::pi) - std::lgamma(half);
}

inline double unit_sphere_volume(int k) { return std::exp(log_unit_sphere_volume(k)); }

}  // namespace nhk::numerics
