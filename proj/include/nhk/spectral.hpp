#pragma once

// Neumann spectrum of a warped product by separation of variables.
//
// Each angular sector l (spherical harmonics of degree l on S^{n-1}) reduces
// the Laplacian to the radial Sturm-Liouville problem
//
//     -(w u')' / w + l (l + n - 2) / f^2 u = lambda u,   w = f^{n-1},
//
// discretized in flux form on a cell-centered mesh r_i = (i + 1/2) h. The pole
// face carries w(0) = 0 and the boundary face carries zero flux (Neumann), so
// neither end needs special treatment.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <numbers>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "nhk/error.hpp"
#include "nhk/geometry.hpp"
#include "nhk/numerics.hpp"
#include "nhk/tridiagonal.hpp"

namespace nhk {

/// Dimension of degree-l spherical harmonics on S^{n-1}.
inline std::int64_t angular_multiplicity(int n, int l) {
  if (n < 2) throw DomainError("angular_multiplicity: n must be >= 2");
  if (l < 0) throw DomainError("angular_multiplicity: l must be >= 0");
  if (l == 0) return 1;
  if (n == 2) return 2;
  // (2l + n - 2) (l + n - 3)! / (l! (n - 2)!) = (2l + n - 2)/(n - 2) * C(l + n - 3, l)
  long double binom = 1.0L;
  for (int i = 1; i <= l; ++i) binom = binom * (n - 3 + i) / i;
  return static_cast<std::int64_t>(std::llround(binom * (2 * l + n - 2) / (n - 2)));
}

/// Angular eigenvalue l (l + n - 2) of S^{n-1}.
inline double angular_eigenvalue(int n, int l) { return static_cast<double>(l) * (l + n - 2); }

/// Cell-centered radial mesh with the volume weights of the model.
struct RadialMesh {
  int n = 2;
  int points = 0;
  double r_max = 0.0;
  double h = 0.0;
  std::vector<double> nodes;         // r_i = (i + 1/2) h
  std::vector<double> cell_weight;   // int_{cell i} f^{n-1} dr
  std::vector<double> face_weight;   // f(k h)^{n-1}, k = 0..points
  std::vector<double> warp_at_node;  // f(r_i)
  double omega = 0.0;                // |S^{n-1}|

  static RadialMesh build(const WarpedProductModel& m, int points) {
    if (points < 64) throw DomainError("mesh_points must be >= 64");
    RadialMesh mesh;
    mesh.n = m.dimension();
    mesh.points = points;
    mesh.r_max = m.r_max();
    mesh.h = m.r_max() / points;
    mesh.omega = numerics::unit_sphere_volume(mesh.n - 1);
    mesh.nodes.resize(points);
    mesh.cell_weight.resize(points);
    mesh.warp_at_node.resize(points);
    mesh.face_weight.resize(points + 1);
    const double h = mesh.h;
    for (int k = 0; k <= points; ++k) mesh.face_weight[k] = (k == 0) ? 0.0 : m.weight(k * h);
    for (int i = 0; i < points; ++i) {
      const double r = (i + 0.5) * h;
      mesh.nodes[i] = r;
      mesh.warp_at_node[i] = m.f(r);
      // composite Simpson on two half-cells
      const double a = i * h, b = (i + 1) * h;
      const double wa = mesh.face_weight[i], wb = mesh.face_weight[i + 1];
      const double wq1 = m.weight(a + 0.25 * h), wq3 = m.weight(a + 0.75 * h);
      const double wm = m.weight(r);
      mesh.cell_weight[i] = (b - a) / 12.0 * (wa + 4.0 * wq1 + 2.0 * wm + 4.0 * wq3 + wb);
    }
    return mesh;
  }

  /// Discrete volume omega * sum of cell weights.
  double volume() const {
    double s = 0.0;
    for (double w : cell_weight) s += w;
    return omega * s;
  }

  /// Weighted inner product omega * sum W_i a_i b_i, the discrete L^2(M) pairing of radial functions.
  double inner(std::span<const double> a, std::span<const double> b) const {
    double s = 0.0;
    for (int i = 0; i < points; ++i) s += cell_weight[i] * a[i] * b[i];
    return omega * s;
  }
};

struct RadialMode {
  int l = 0;
  int j = 0;
  double lambda = 0.0;
  std::vector<double> u;   // at mesh nodes, normalized in L^2(M)
  std::vector<double> du;  // centered differences at mesh nodes
};

namespace detail {

// Samples on nodes extended by two ghost cells at each end. Pole parity is
// (-1)^l for u; the Neumann end reflects u evenly.
inline double ghosted(std::span<const double> v, int i, double pole_parity, double end_parity) {
  const int N = static_cast<int>(v.size());
  if (i < 0) return pole_parity * v[-i - 1];
  if (i >= N) return end_parity * v[2 * N - 1 - i];
  return v[i];
}

/// Four-point Lagrange interpolation of node samples at radius r.
inline double interpolate(const RadialMesh& mesh, std::span<const double> v, double r, double pole_parity,
                          double end_parity) {
  const double x = r / mesh.h - 0.5;  // fractional node index
  int i0 = static_cast<int>(std::floor(x));
  i0 = std::clamp(i0, -1, mesh.points - 1);
  const double s = x - i0;
  const double p0 = ghosted(v, i0 - 1, pole_parity, end_parity);
  const double p1 = ghosted(v, i0, pole_parity, end_parity);
  const double p2 = ghosted(v, i0 + 1, pole_parity, end_parity);
  const double p3 = ghosted(v, i0 + 2, pole_parity, end_parity);
  // nodes at -1, 0, 1, 2 relative to i0
  const double l0 = -s * (s - 1.0) * (s - 2.0) / 6.0;
  const double l1 = (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0;
  const double l2 = -(s + 1.0) * s * (s - 2.0) / 2.0;
  const double l3 = (s + 1.0) * s * (s - 1.0) / 6.0;
  return l0 * p0 + l1 * p1 + l2 * p2 + l3 * p3;
}

inline int resolve_threads() {
  if (const char* env = std::getenv("NHK_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

inline SymmetricTridiagonal radial_matrix(const RadialMesh& mesh, int l) {
  const int N = mesh.points;
  const double h = mesh.h;
  const double ang = angular_eigenvalue(mesh.n, l);
  std::vector<double> diag(N), off(N - 1);
  for (int i = 0; i < N; ++i) {
    const double a_lo = mesh.face_weight[i] / h;
    const double a_hi = (i + 1 < N) ? mesh.face_weight[i + 1] / h : 0.0;  // Neumann face
    const double f = mesh.warp_at_node[i];
    diag[i] = (a_lo + a_hi) / mesh.cell_weight[i] + ang / (f * f);
    if (i + 1 < N) off[i] = -a_hi / std::sqrt(mesh.cell_weight[i] * mesh.cell_weight[i + 1]);
  }
  return SymmetricTridiagonal(std::move(diag), std::move(off));
}

inline void fill_derivative(const RadialMesh& mesh, RadialMode& mode) {
  const double parity = (mode.l % 2 == 0) ? 1.0 : -1.0;
  mode.du.resize(mesh.points);
  for (int i = 0; i < mesh.points; ++i) {
    mode.du[i] = (ghosted(mode.u, i + 1, parity, 1.0) - ghosted(mode.u, i - 1, parity, 1.0)) / (2.0 * mesh.h);
  }
}

inline std::vector<RadialMode> solve_sector(const RadialMesh& mesh, int l, int num_modes) {
  const SymmetricTridiagonal T = radial_matrix(mesh, l);
  const int N = mesh.points;
  std::vector<RadialMode> out;
  out.reserve(num_modes);
  double prev = -1.0;
  for (int j = 0; j < num_modes && j < N; ++j) {
    RadialMode mode;
    mode.l = l;
    mode.j = j;
    if (l == 0 && j == 0) {
      // constants are an exact discrete eigenvector
      mode.lambda = 0.0;
      const double c = 1.0 / std::sqrt(mesh.volume());
      mode.u.assign(N, c);
    } else {
      mode.lambda = T.eigenvalue(static_cast<std::size_t>(j));
      std::vector<double> v = T.eigenvector(mode.lambda);
      const double res = T.residual_norm(mode.lambda, v);
      if (!std::isfinite(res) || res > 1e-6 * std::max(1.0, std::abs(mode.lambda))) {
        throw SolverError("inverse iteration failed to converge at (l, j) = (" + std::to_string(l) + ", " +
                          std::to_string(j) + ")");
      }
      double vmax = 0.0;
      for (double x : v) vmax = std::max(vmax, std::abs(x));
      double sign = 1.0;
      for (double x : v) {
        if (std::abs(x) > 1e-3 * vmax) {
          sign = x > 0.0 ? 1.0 : -1.0;
          break;
        }
      }
      mode.u.resize(N);
      const double norm = 1.0 / std::sqrt(mesh.omega);
      for (int i = 0; i < N; ++i) mode.u[i] = sign * v[i] * norm / std::sqrt(mesh.cell_weight[i]);
    }
    if (!(mode.lambda > prev)) {
      throw SolverError("eigenvalues not strictly increasing at (l, j) = (" + std::to_string(l) + ", " +
                        std::to_string(j) + ")");
    }
    prev = mode.lambda;
    fill_derivative(mesh, mode);
    out.push_back(std::move(mode));
  }
  return out;
}

}  // namespace detail

/// The num_modes smallest radial eigenpairs of sector l.
inline std::vector<RadialMode> solve_radial_modes(const WarpedProductModel& model, int l, int mesh_points,
                                                  int num_modes) {
  if (num_modes < 1) throw DomainError("solve_radial_modes: num_modes must be >= 1");
  if (l < 0) throw DomainError("solve_radial_modes: l must be >= 0");
  const RadialMesh mesh = RadialMesh::build(model, mesh_points);
  return detail::solve_sector(mesh, l, num_modes);
}

struct Truncation {
  int l_max = 0;
  int modes_per_l = 0;  // 0: automatic (all modes below the angular cutoff)
  int mesh_points = 0;
  double lambda_cut = 0.0;
};

/// Flattened spectrum entry; `mode` indexes SpectrumTable::modes().
struct SortedEigenvalue {
  double lambda = 0.0;
  std::size_t mode = 0;
};

/// Assembled Neumann spectrum; immutable after construction.
class SpectrumTable {
 public:
  SpectrumTable(RadialMesh mesh, std::vector<RadialMode> modes, Truncation trunc, double rho_eff)
      : mesh_(std::move(mesh)), modes_(std::move(modes)), trunc_(trunc), rho_eff_(rho_eff) {
    std::stable_sort(modes_.begin(), modes_.end(), [](const RadialMode& a, const RadialMode& b) {
      if (a.lambda != b.lambda) return a.lambda < b.lambda;
      if (a.l != b.l) return a.l < b.l;
      return a.j < b.j;
    });
    multiplicity_.reserve(modes_.size());
    for (std::size_t i = 0; i < modes_.size(); ++i) {
      const auto m = angular_multiplicity(mesh_.n, modes_[i].l);
      multiplicity_.push_back(m);
      for (std::int64_t c = 0; c < m; ++c) sorted_.push_back({modes_[i].lambda, i});
    }
    volume_ = mesh_.volume();
  }

  int dimension() const { return mesh_.n; }
  double rho_eff() const { return rho_eff_; }
  double volume() const { return volume_; }
  const RadialMesh& mesh() const { return mesh_; }
  const std::vector<RadialMode>& modes() const { return modes_; }
  std::int64_t multiplicity(std::size_t mode) const { return multiplicity_[mode]; }
  const std::vector<SortedEigenvalue>& sorted() const { return sorted_; }
  const Truncation& truncation() const { return trunc_; }

  /// lambda_k for k within the certified range.
  double eigenvalue(std::size_t k) const {
    if (k >= sorted_.size()) throw TruncationError("eigenvalue index beyond certified range");
    return sorted_[k].lambda;
  }

  /// u(r) and u'(r) of one mode by interpolation.
  std::pair<double, double> evaluate(std::size_t mode, double r) const {
    const RadialMode& md = modes_[mode];
    const double parity = (md.l % 2 == 0) ? 1.0 : -1.0;
    const double u = detail::interpolate(mesh_, md.u, r, parity, 1.0);
    const double du = detail::interpolate(mesh_, md.du, r, -parity, -1.0);
    return {u, du};
  }

 private:
  RadialMesh mesh_;
  std::vector<RadialMode> modes_;
  std::vector<std::int64_t> multiplicity_;
  std::vector<SortedEigenvalue> sorted_;
  Truncation trunc_;
  double rho_eff_ = 0.0;
  double volume_ = 0.0;
};

/// Solve every sector l <= l_max and merge with multiplicities.
///
/// lambda_cut is the largest value below which the table is certified complete:
/// sectors l > l_max have spectrum >= l(l+n-2)/max f^2, and within each computed
/// sector a Sturm count confirms no eigenvalue below the cut was skipped.
inline SpectrumTable assemble_spectrum(const WarpedProductModel& model, double rho_eff, int l_max, int mesh_points,
                                       int modes_per_l = 0) {
  if (l_max < 0) throw DomainError("assemble_spectrum: l_max must be >= 0");
  if (modes_per_l < 0) throw DomainError("assemble_spectrum: modes_per_l must be >= 0");
  const RadialMesh mesh = RadialMesh::build(model, mesh_points);
  const int n = model.dimension();
  const double fmax = model.max_warp();
  const double angular_cut = angular_eigenvalue(n, l_max + 1) / (fmax * fmax);

  std::vector<std::vector<RadialMode>> per_l(l_max + 1);
  std::vector<std::string> failures(l_max + 1);
  std::atomic<int> next{0};
  const auto worker = [&] {
    for (int l = next++; l <= l_max; l = next++) {
      try {
        const SymmetricTridiagonal T = detail::radial_matrix(mesh, l);
        int count = static_cast<int>(T.count_below(angular_cut));
        if (modes_per_l > 0) count = std::min(count + 1, modes_per_l);
        if (count == 0) continue;
        per_l[l] = detail::solve_sector(mesh, l, count);
      } catch (const std::exception& e) {
        failures[l] = e.what();
      }
    }
  };
  const int threads = std::min(detail::resolve_threads(), l_max + 1);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (const auto& f : failures) {
    if (!f.empty()) throw SolverError(f);
  }

  double cut = angular_cut;
  if (modes_per_l > 0) {
    for (int l = 0; l <= l_max; ++l) {
      const auto& v = per_l[l];
      if (static_cast<int>(v.size()) == modes_per_l) cut = std::min(cut, v.back().lambda);
    }
  }
  std::vector<RadialMode> kept;
  for (int l = 0; l <= l_max; ++l) {
    const SymmetricTridiagonal T = detail::radial_matrix(mesh, l);
    std::size_t below = 0;
    for (auto& md : per_l[l]) {
      if (md.lambda < cut) {
        ++below;
        kept.push_back(std::move(md));
      }
    }
    if (T.count_below(cut) != below) {
      throw TruncationError("spectrum incomplete in sector l = " + std::to_string(l) +
                            "; increase l_max or modes_per_l");
    }
  }
  if (kept.size() < 2 || !(cut > 0.0)) {
    throw TruncationError("no certified eigenvalues beyond lambda_0; increase l_max or modes_per_l");
  }
  Truncation trunc{l_max, modes_per_l, mesh_points, cut};
  return SpectrumTable(mesh, std::move(kept), trunc, rho_eff);
}

struct TraceValue {
  double value = 0.0;
  double tail_bound = 0.0;
  bool truncation_warning = false;
};

/// Upper bound on sum_{lambda >= cut} e^{-lambda t} from the trace upper bound at t/2.
inline double trace_tail_bound(int n, double rho, double lambda_cut, double t) {
  return std::exp(-0.5 * lambda_cut * t) * std::pow(-std::expm1(-rho * t / 3.0), -0.5 * n);
}

/// sum_k e^{-lambda_k t} over the certified spectrum, with a tail estimate.
inline TraceValue heat_trace(const SpectrumTable& s, double t) {
  if (!(t > 0.0)) throw DomainError("heat_trace: t must be positive");
  TraceValue out;
  // descending order keeps the summation well conditioned
  for (std::size_t i = s.modes().size(); i-- > 0;) {
    out.value += static_cast<double>(s.multiplicity(i)) * std::exp(-s.modes()[i].lambda * t);
  }
  out.tail_bound = trace_tail_bound(s.dimension(), s.rho_eff(), s.truncation().lambda_cut, t);
  out.truncation_warning = out.tail_bound > 0.01 * out.value;
  return out;
}

struct KernelValue {
  double value = 0.0;
  double tail_bound = 0.0;
  bool truncation_warning = false;
};

/// Pointwise tail bound from Cauchy-Schwarz and the on-diagonal upper bound at t/2.
inline double kernel_tail_bound(const SpectrumTable& s, double t) {
  const int n = s.dimension();
  return std::exp(-0.5 * s.truncation().lambda_cut * t) / s.volume() *
         std::pow(-std::expm1(-s.rho_eff() * t / 3.0), -0.5 * n);
}

/// Mode values u_{l,j}(r) at a fixed radius, reused across many kernel evaluations.
class ModeSamples {
 public:
  ModeSamples(const SpectrumTable& s, double r) : r_(r) {
    values_.reserve(s.modes().size());
    derivs_.reserve(s.modes().size());
    for (std::size_t i = 0; i < s.modes().size(); ++i) {
      const auto [u, du] = s.evaluate(i, r);
      values_.push_back(u);
      derivs_.push_back(du);
    }
  }
  double radius() const { return r_; }
  const std::vector<double>& values() const { return values_; }
  const std::vector<double>& derivatives() const { return derivs_; }

 private:
  double r_;
  std::vector<double> values_;
  std::vector<double> derivs_;
};

/// p(t, x, y) from pre-sampled modes. `dtheta` must be 0 unless n = 2.
///
/// With u normalized in L^2(M), the eigenfunctions of sector l are
/// sqrt(|S^{n-1}|) u(r) Y(theta) over an orthonormal harmonic basis Y, so the
/// addition theorem contributes m(n, l) on a meridian and 2 cos(l dtheta) for n = 2.
inline KernelValue heat_kernel(const SpectrumTable& s, const ModeSamples& x, const ModeSamples& y, double dtheta,
                               double t) {
  if (!(t > 0.0)) throw DomainError("heat_kernel: t must be positive");
  const int n = s.dimension();
  if (n != 2 && dtheta != 0.0) {
    throw UnsupportedError("heat_kernel: off-meridian points are supported only for n = 2");
  }
  KernelValue out;
  for (std::size_t i = s.modes().size(); i-- > 0;) {
    const RadialMode& md = s.modes()[i];
    double angular = 0.0;
    if (n == 2) {
      angular = (md.l == 0) ? 1.0 : 2.0 * std::cos(md.l * dtheta);
    } else {
      angular = static_cast<double>(s.multiplicity(i));
    }
    out.value += std::exp(-md.lambda * t) * x.values()[i] * y.values()[i] * angular;
  }
  out.tail_bound = kernel_tail_bound(s, t);
  out.truncation_warning = out.tail_bound > 1e-6 * std::abs(out.value);
  return out;
}

inline KernelValue heat_kernel(const SpectrumTable& s, PolarPoint x, PolarPoint y, double t) {
  const double dtheta = y.theta - x.theta;
  if (s.dimension() != 2 && dtheta != 0.0) {
    throw UnsupportedError("heat_kernel: off-meridian points are supported only for n = 2");
  }
  return heat_kernel(s, ModeSamples(s, x.r), ModeSamples(s, y.r), dtheta, t);
}

/// Expansion of a radial function in the l = 0 modes of a spectrum.
class RadialSemigroup {
 public:
  RadialSemigroup(const SpectrumTable& s, std::span<const double> samples) : spectrum_(&s) {
    if (static_cast<int>(samples.size()) != s.mesh().points) {
      throw DomainError("RadialSemigroup: samples must live on the solver mesh");
    }
    for (std::size_t i = 0; i < s.modes().size(); ++i) {
      if (s.modes()[i].l != 0) continue;
      index_.push_back(i);
      coeff_.push_back(s.mesh().inner(samples, s.modes()[i].u));
    }
  }

  struct Value {
    double value = 0.0;      // P_t f
    double dr = 0.0;         // d/dr P_t f
    double laplacian = 0.0;  // Delta P_t f
  };

  Value at(double t, double r) const {
    if (!(t >= 0.0)) throw DomainError("RadialSemigroup: t must be >= 0");
    Value v;
    for (std::size_t k = index_.size(); k-- > 0;) {
      const std::size_t i = index_[k];
      const double lam = spectrum_->modes()[i].lambda;
      const auto [u, du] = spectrum_->evaluate(i, r);
      const double c = coeff_[k] * std::exp(-lam * t);
      v.value += c * u;
      v.dr += c * du;
      v.laplacian -= lam * c * u;
    }
    return v;
  }

  /// P_t f at every mesh node (node samples, no interpolation).
  std::vector<double> on_mesh(double t) const {
    const RadialMesh& mesh = spectrum_->mesh();
    std::vector<double> out(mesh.points, 0.0);
    for (std::size_t k = 0; k < index_.size(); ++k) {
      const RadialMode& md = spectrum_->modes()[index_[k]];
      const double c = coeff_[k] * std::exp(-md.lambda * t);
      for (int i = 0; i < mesh.points; ++i) out[i] += c * md.u[i];
    }
    return out;
  }

  const std::vector<double>& coefficients() const { return coeff_; }

 private:
  const SpectrumTable* spectrum_;
  std::vector<std::size_t> index_;
  std::vector<double> coeff_;
};

/// (P_t f, d/dr P_t f, Delta P_t f) at radius r for positive radial f sampled on the mesh.
inline RadialSemigroup::Value apply_semigroup_radial(const SpectrumTable& s, std::span<const double> f, double t,
                                                     double r) {
  for (double v : f) {
    if (!(v > 0.0)) throw DomainError("apply_semigroup_radial: f must be strictly positive");
  }
  return RadialSemigroup(s, f).at(t, r);
}

}  // namespace nhk
