#pragma once

// Real symmetric tridiagonal eigenproblems: Sturm-sequence bisection for the
// eigenvalues, inverse iteration for the eigenvectors.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "nhk/error.hpp"

namespace nhk {

/// Symmetric tridiagonal matrix: diag[0..N), off[0..N-1) with off[i] = T(i, i+1).
class SymmetricTridiagonal {
 public:
  SymmetricTridiagonal(std::vector<double> diag, std::vector<double> off)
      : diag_(std::move(diag)), off_(std::move(off)) {
    if (diag_.empty() || off_.size() + 1 != diag_.size()) {
      throw DomainError("SymmetricTridiagonal: need off.size() == diag.size() - 1");
    }
    off_sq_.resize(off_.size());
    for (std::size_t i = 0; i < off_.size(); ++i) off_sq_[i] = off_[i] * off_[i];
  }

  std::size_t size() const { return diag_.size(); }
  std::span<const double> diag() const { return diag_; }
  std::span<const double> off() const { return off_; }

  /// Number of eigenvalues strictly less than x (Sturm count via LDL^T pivots).
  std::size_t count_below(double x) const {
    const double tiny = std::numeric_limits<double>::min() * 4.0;
    std::size_t count = 0;
    double q = diag_[0] - x;
    if (q < 0.0) ++count;
    for (std::size_t i = 1; i < diag_.size(); ++i) {
      if (std::abs(q) < tiny) q = -tiny;
      q = diag_[i] - x - off_sq_[i - 1] / q;
      if (q < 0.0) ++count;
    }
    return count;
  }

  /// Gershgorin interval containing the spectrum.
  std::pair<double, double> gershgorin() const {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    const std::size_t n = diag_.size();
    for (std::size_t i = 0; i < n; ++i) {
      const double rad = (i > 0 ? std::abs(off_[i - 1]) : 0.0) + (i + 1 < n ? std::abs(off_[i]) : 0.0);
      lo = std::min(lo, diag_[i] - rad);
      hi = std::max(hi, diag_[i] + rad);
    }
    return {lo, hi};
  }

  /// k-th smallest eigenvalue (0-based) by bisection to absolute tolerance `tol`
  /// (or a few ulps of the eigenvalue when that is larger).
  double eigenvalue(std::size_t k, double tol = 1e-12) const {
    if (k >= size()) throw DomainError("SymmetricTridiagonal::eigenvalue: index out of range");
    auto [lo, hi] = gershgorin();
    const double pad = 1e-12 * std::max(1.0, std::max(std::abs(lo), std::abs(hi)));
    lo -= pad;
    hi += pad;
    for (int it = 0; it < 2000; ++it) {
      const double width_tol = std::max(tol, 4.0 * std::numeric_limits<double>::epsilon() *
                                                 std::max(std::abs(lo), std::abs(hi)));
      if (hi - lo <= width_tol) return 0.5 * (lo + hi);
      const double mid = 0.5 * (lo + hi);
      if (count_below(mid) > k) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    throw SolverError("bisection did not converge for eigenvalue index " + std::to_string(k));
  }

  /// Unit eigenvector for an (accurate) eigenvalue estimate, by inverse iteration.
  std::vector<double> eigenvector(double lambda, int iterations = 4) const {
    const std::size_t n = size();
    const auto [glo, ghi] = gershgorin();
    const double scale = std::max({std::abs(glo), std::abs(ghi), 1.0});
    // shift slightly off the eigenvalue so the factorization stays nonsingular
    const double shift = lambda + 8.0 * std::numeric_limits<double>::epsilon() * scale;
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = 1.0 + 0.01 * std::sin(0.7 * static_cast<double>(i) + 0.3);
    normalize(x);
    for (int it = 0; it < iterations; ++it) {
      x = solve_shifted(shift, x);
      if (!normalize(x)) {
        throw SolverError("inverse iteration produced a non-finite vector at lambda = " + std::to_string(lambda));
      }
    }
    return x;
  }

  double residual_norm(double lambda, std::span<const double> v) const {
    const std::size_t n = size();
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double y = (diag_[i] - lambda) * v[i];
      if (i > 0) y += off_[i - 1] * v[i - 1];
      if (i + 1 < n) y += off_[i] * v[i + 1];
      acc += y * y;
    }
    return std::sqrt(acc);
  }

 private:
  static bool normalize(std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    s = std::sqrt(s);
    if (!(s > 0.0) || !std::isfinite(s)) return false;
    for (double& v : x) v /= s;
    return true;
  }

  // Gaussian elimination with partial pivoting for (T - shift I) y = b, as in LAPACK gtsv.
  std::vector<double> solve_shifted(double shift, const std::vector<double>& b) const {
    const std::size_t n = size();
    std::vector<double> dl(off_.begin(), off_.end());
    std::vector<double> d(n), du(off_.begin(), off_.end()), du2(n, 0.0), y(b);
    for (std::size_t i = 0; i < n; ++i) d[i] = diag_[i] - shift;
    const double tiny = std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(shift)) * 1e-3;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (std::abs(d[i]) >= std::abs(dl[i])) {
        if (d[i] == 0.0) d[i] = tiny;
        const double fact = dl[i] / d[i];
        d[i + 1] -= fact * du[i];
        y[i + 1] -= fact * y[i];
        dl[i] = 0.0;
      } else {
        const double fact = d[i] / dl[i];
        d[i] = dl[i];
        const double tmp = d[i + 1];
        d[i + 1] = du[i] - fact * tmp;
        if (i + 2 < n) {
          du2[i] = du[i + 1];
          du[i + 1] = -fact * du2[i];
        }
        du[i] = tmp;
        std::swap(y[i], y[i + 1]);
        y[i + 1] -= fact * y[i];
      }
    }
    if (d[n - 1] == 0.0) d[n - 1] = tiny;
    y[n - 1] /= d[n - 1];
    if (n < 2) return y;
    y[n - 2] = (y[n - 2] - du[n - 2] * y[n - 1]) / d[n - 2];
    for (std::size_t i = n - 2; i-- > 0;) {
      y[i] = (y[i] - du[i] * y[i + 1] - du2[i] * y[i + 2]) / d[i];
    }
    return y;
  }

  std::vector<double> diag_;
  std::vector<double> off_;
  std::vector<double> off_sq_;
};

}  // namespace nhk
