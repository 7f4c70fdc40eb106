#pragma once

// Inequality checks C1..C11: closed-form bounds against the spectral ground truth.
//
// Each instance is evaluated on the primary spectrum and, when refinement is
// enabled, on a half-resolution spectrum; their difference is the
// discretization budget folded into the slack:
//
//     pass  <=>  margin >= -(1e-8 |rhs| + budget + truncation tails).

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nhk/bounds.hpp"
#include "nhk/config.hpp"
#include "nhk/error.hpp"
#include "nhk/geometry.hpp"
#include "nhk/spectral.hpp"

namespace nhk {

enum class Status { pass, fail, skipped };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::pass:
      return "pass";
    case Status::fail:
      return "fail";
    default:
      return "skipped";
  }
}

inline Status parse_status(std::string_view s) {
  if (s == "pass") return Status::pass;
  if (s == "fail") return Status::fail;
  if (s == "skipped") return Status::skipped;
  throw ConfigError("unknown status '" + std::string(s) + "'");
}

/// Parameter instance of one check; unused coordinates stay empty.
struct CheckParams {
  std::optional<double> t{}, s{}, r1{}, r2{}, r3{}, theta2{}, theta3{}, k{}, eps{};
  bool operator==(const CheckParams&) const = default;
};

struct CheckResult {
  CheckId id = CheckId::C1;
  std::string variant;
  CheckParams params;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;
  double slack = 0.0;
  Status status = Status::skipped;
  std::string reason;
  bool operator==(const CheckResult&) const = default;
};

struct CheckSummary {
  CheckId id = CheckId::C1;
  std::size_t count = 0, passed = 0, failed = 0, skipped = 0;
  std::optional<double> min_margin;
  std::optional<std::size_t> worst;  // index into VerificationReport::results
  bool operator==(const CheckSummary&) const = default;
};

struct SpectrumInfo {
  int n = 0;
  double rho_eff = 0.0;
  int mesh_points = 0;
  int l_max = 0;
  int modes_per_l = 0;
  double lambda_cut = 0.0;
  std::size_t modes = 0;
  std::size_t eigenvalues = 0;
  std::optional<int> coarse_mesh_points;
  bool operator==(const SpectrumInfo&) const = default;
};

struct VerificationReport {
  json config;
  GeometryReport geometry;
  SpectrumInfo spectrum;
  std::vector<double> t_grid;
  std::vector<double> r_grid;
  std::vector<CheckResult> results;
  std::vector<CheckSummary> summaries;
  std::vector<std::string> notes;
  bool verdict_pass = true;
};

inline bool operator==(const GeometryReport& a, const GeometryReport& b) {
  return a.rho_eff == b.rho_eff && a.pi_min == b.pi_min && a.volume == b.volume && a.diameter == b.diameter &&
         a.diameter_certified == b.diameter_certified;
}

inline bool operator==(const VerificationReport& a, const VerificationReport& b) {
  return a.config == b.config && a.geometry == b.geometry && a.spectrum == b.spectrum && a.t_grid == b.t_grid &&
         a.r_grid == b.r_grid && a.results == b.results && a.summaries == b.summaries && a.notes == b.notes &&
         a.verdict_pass == b.verdict_pass;
}

/// Options the check runners consume, resolved from a RunConfig.
struct VerifyOptions {
  std::vector<double> t_grid;
  std::vector<double> r_grid;
  int k_max = 200;
  double slack_rel = 1e-8;
  double kernel_tail_rel = 1e-6;
  std::vector<double> eps_family{0.1, 0.5, 0.9};
  std::optional<std::vector<double>> test_samples;
  std::vector<CheckId> checks{kAllChecks.begin(), kAllChecks.end()};
  /// Large index for the formula-only asymptotic ratios and their band.
  double asym_k = 1e8;
  double asym_band = 0.01;

  bool enabled(CheckId id) const { return std::find(checks.begin(), checks.end(), id) != checks.end(); }
};

/// 12 interior radii from the pole outward plus the boundary.
inline std::vector<double> default_r_grid(double r_max, int interior = 12) {
  std::vector<double> r;
  for (int i = 0; i < interior; ++i) r.push_back(r_max * i / interior);
  r.push_back(r_max);
  return r;
}

/// Fixed radial test functions.
///
/// Neumann family (C1, C2, C11): f(r) = 1 + eps cos^2(pi r / (2 R)), f'(R) = 0.
/// Outward-decreasing family (C10): g(r) = 1 + eps cos(pi r / (2 R)), g'(R) < 0.
struct RadialTestFunction {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

inline RadialTestFunction neumann_family(double eps, double R, double r) {
  const double c = std::numbers::pi / R;
  return {1.0 + eps * std::pow(std::cos(0.5 * c * r), 2), -0.5 * eps * c * std::sin(c * r),
          -0.5 * eps * c * c * std::cos(c * r)};
}

inline RadialTestFunction decreasing_family(double eps, double R, double r) {
  const double c = 0.5 * std::numbers::pi / R;
  return {1.0 + eps * std::cos(c * r), -eps * c * std::sin(c * r), -eps * c * c * std::cos(c * r)};
}

/// Laplacian of a radial function on the warped product: g'' + (n - 1) (f'/f) g'.
inline double radial_laplacian(const WarpedProductModel& m, double r, const RadialTestFunction& g) {
  return g.d2 + (m.dimension() - 1) * m.df(r) / m.f(r) * g.d1;
}

namespace detail {

struct Eval {
  double lhs = 0.0;
  double rhs = 0.0;
  double tail = 0.0;
  std::optional<std::string> skip{};
};

/// Ground-truth context for one spectrum.
struct Truth {
  const SpectrumTable* spectrum = nullptr;
  std::vector<ModeSamples> samples;  // at VerifyOptions::r_grid
};

inline std::vector<double> sample_on_mesh(const RadialMesh& mesh, const std::function<double(double)>& g) {
  std::vector<double> out(mesh.points);
  for (int i = 0; i < mesh.points; ++i) out[i] = g(mesh.nodes[i]);
  return out;
}

/// Linear interpolation of uniform samples on [0, R].
inline double interpolate_uniform(const std::vector<double>& v, double R, double r) {
  const double x = std::clamp(r / R, 0.0, 1.0) * (v.size() - 1);
  const std::size_t i = std::min(static_cast<std::size_t>(x), v.size() - 2);
  const double s = x - i;
  return (1.0 - s) * v[i] + s * v[i + 1];
}

/// Semigroup applied to a radial function, with a pointwise bound for the part
/// of the function outside the computed l = 0 modes.
struct RadialField {
  RadialSemigroup semigroup;
  double residual_norm = 0.0;

  RadialField(const SpectrumTable& s, const std::vector<double>& samples) : semigroup(s, samples) {
    const auto projected = semigroup.on_mesh(0.0);
    std::vector<double> res(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) res[i] = samples[i] - projected[i];
    residual_norm = std::sqrt(std::max(0.0, s.mesh().inner(res, res)));
  }

  /// Bound on |P_t r| for the discarded part r: |sum e^{-lambda t} c u| <= |c| sqrt(tail(2t)).
  double tail(const SpectrumTable& s, double t) const {
    if (t <= 0.0) return residual_norm;
    return residual_norm * std::sqrt(kernel_tail_bound(s, 2.0 * t));
  }

  /// Bound on |grad P_t r| from 2u |grad P_u h|^2 <= P_u h^2 with u = t/2 (Ric >= 0, convex boundary).
  double gradient_tail(const SpectrumTable& s, double t) const {
    if (t <= 0.0) return std::numeric_limits<double>::infinity();
    return residual_norm * std::sqrt(kernel_tail_bound(s, t) / t);
  }

  /// Bound on |Delta P_t r| using sup over the discarded range of lambda e^{-lambda t/2}.
  double laplacian_tail(const SpectrumTable& s, double t) const {
    if (t <= 0.0) return std::numeric_limits<double>::infinity();
    const double cut = s.truncation().lambda_cut;
    const double peak = cut >= 2.0 / t ? cut * std::exp(-0.5 * cut * t) : 2.0 / (std::numbers::e * t);
    return residual_norm * peak * std::sqrt(kernel_tail_bound(s, t));
  }
};

class Runner {
 public:
  Runner(const WarpedProductModel& model, const GeometryReport& geo, const SpectrumTable& fine,
         const SpectrumTable* coarse, const VerifyOptions& opt)
      : model_(model), geo_(geo), opt_(opt) {
    truths_.push_back(make_truth(fine));
    if (coarse != nullptr) truths_.push_back(make_truth(*coarse));
  }

  std::vector<CheckResult> pointwise() {
    std::vector<CheckResult> out;
    if (opt_.enabled(CheckId::C1)) liyau(out);
    if (opt_.enabled(CheckId::C2)) harnack_semigroup(out);
    if (opt_.enabled(CheckId::C3)) harnack_kernel(out);
    if (opt_.enabled(CheckId::C4)) ondiag(out);
    if (opt_.enabled(CheckId::C5)) refined_ball(out);
    if (opt_.enabled(CheckId::C6)) diameter_corollary(out);
    if (opt_.enabled(CheckId::C10)) submartingale(out);
    if (opt_.enabled(CheckId::C11)) qian(out);
    return out;
  }

  std::vector<CheckResult> spectral() {
    std::vector<CheckResult> out;
    if (opt_.enabled(CheckId::C7)) trace_sandwich(out);
    if (opt_.enabled(CheckId::C8)) eigen_bounds(out);
    if (opt_.enabled(CheckId::C9)) asymptotic(out);
    return out;
  }

 private:
  Truth make_truth(const SpectrumTable& s) const {
    Truth tr;
    tr.spectrum = &s;
    for (double r : opt_.r_grid) tr.samples.emplace_back(s, r);
    return tr;
  }

  int n() const { return model_.dimension(); }
  double rho() const { return geo_.rho_eff; }
  double R() const { return model_.r_max(); }

  /// Evaluate on every spectrum; the primary value decides, the spread feeds the slack.
  CheckResult judge(CheckId id, std::string variant, CheckParams params,
                    const std::function<Eval(std::size_t)>& eval) const {
    CheckResult res;
    res.id = id;
    res.variant = std::move(variant);
    res.params = params;
    const Eval primary = eval(0);
    if (primary.skip) {
      res.status = Status::skipped;
      res.reason = *primary.skip;
      return res;
    }
    res.lhs = primary.lhs;
    res.rhs = primary.rhs;
    res.margin = primary.rhs - primary.lhs;
    // a truncation tail comparable to the values would make the verdict vacuous
    if (primary.tail > opt_.kernel_tail_rel * std::max(std::abs(primary.lhs), std::abs(primary.rhs))) {
      res.status = Status::skipped;
      res.reason = "spectral tail " + std::to_string(primary.tail) + " exceeds resolution; increase l_max";
      return res;
    }
    double budget = primary.tail;
    for (std::size_t i = 1; i < truths_.size(); ++i) {
      const Eval other = eval(i);
      if (other.skip) continue;
      budget = std::max(budget, primary.tail + std::abs(other.lhs - primary.lhs) + std::abs(other.rhs - primary.rhs));
    }
    res.slack = opt_.slack_rel * std::abs(primary.rhs) + budget;
    res.status = (res.margin >= -res.slack) ? Status::pass : Status::fail;
    return res;
  }

  static CheckResult skipped(CheckId id, std::string variant, CheckParams params, std::string reason) {
    CheckResult res;
    res.id = id;
    res.variant = std::move(variant);
    res.params = params;
    res.status = Status::skipped;
    res.reason = std::move(reason);
    return res;
  }

  /// (fields per spectrum) for each test function used by C1/C2.
  struct TestFunction {
    std::optional<double> eps;
    std::vector<RadialField> fields;  // one per truth
  };

  std::vector<TestFunction> neumann_tests() const {
    std::vector<TestFunction> out;
    if (opt_.test_samples) {
      TestFunction tf;
      for (const auto& tr : truths_) {
        const auto& v = *opt_.test_samples;
        tf.fields.emplace_back(*tr.spectrum, sample_on_mesh(tr.spectrum->mesh(), [&](double r) {
                                 return interpolate_uniform(v, R(), r);
                               }));
      }
      out.push_back(std::move(tf));
      return out;
    }
    for (double eps : opt_.eps_family) {
      TestFunction tf;
      tf.eps = eps;
      for (const auto& tr : truths_) {
        tf.fields.emplace_back(*tr.spectrum, sample_on_mesh(tr.spectrum->mesh(), [&](double r) {
                                 return neumann_family(eps, R(), r).value;
                               }));
      }
      out.push_back(std::move(tf));
    }
    return out;
  }

  std::optional<std::string> kernel_resolved(const SpectrumTable& s, double t, double value) const {
    const double tail = kernel_tail_bound(s, t);
    if (tail > opt_.kernel_tail_rel * std::abs(value)) {
      return "spectral tail " + std::to_string(tail) + " exceeds resolution at t = " + std::to_string(t) +
             "; increase l_max";
    }
    return std::nullopt;
  }

  // C1: |d_r ln P_t f|^2 <= a Delta P_t f / P_t f + b.
  void liyau(std::vector<CheckResult>& out) const {
    for (const auto& tf : neumann_tests()) {
      for (double t : opt_.t_grid) {
        const LiYauCoeffs c = liyau_coeffs(n(), rho(), t);
        for (double r : opt_.r_grid) {
          out.push_back(judge(CheckId::C1, "gradient", {.t = t, .r1 = r, .eps = tf.eps}, [&](std::size_t i) {
            const auto& s = *truths_[i].spectrum;
            const auto& field = tf.fields[i];
            const auto v = field.semigroup.at(t, r);
            const double g = v.dr / v.value, q = v.laplacian / v.value;
            // first-order propagation of the value, gradient and Laplacian tails through the ratios
            const double d0 = field.tail(s, t), d1 = field.gradient_tail(s, t), d2 = field.laplacian_tail(s, t);
            const double floor = v.value - d0;
            if (!(floor > 0.0)) {
              Eval e;
              e.skip = "semigroup tail exceeds P_t f; increase l_max";
              return e;
            }
            const double eg = (d1 + std::abs(g) * d0) / floor, eq = (d2 + std::abs(q) * d0) / floor;
            return Eval{g * g, c.a * q + c.b, 2.0 * std::abs(g) * eg + eg * eg + c.a * eq};
          }));
        }
      }
    }
  }

  // C2: P_s f(x) <= H(s, t, d(x, y)) P_t f(y) with s = t/2.
  void harnack_semigroup(std::vector<CheckResult>& out) const {
    std::vector<double> radii;
    for (std::size_t i = 0; i < opt_.r_grid.size(); i += 3) radii.push_back(opt_.r_grid[i]);
    if (radii.back() != opt_.r_grid.back()) radii.push_back(opt_.r_grid.back());
    std::vector<double> angles{0.0};
    if (model_.is_round()) angles.push_back(std::numbers::pi);
    for (const auto& tf : neumann_tests()) {
      for (double t : opt_.t_grid) {
        const double s = 0.5 * t;
        for (double ra : radii) {
          for (double rb : radii) {
            for (double th : angles) {
              CheckParams p{.t = t, .s = s, .r1 = ra, .r2 = rb, .theta2 = th, .eps = tf.eps};
              if (!model_.is_round() && ra != rb) {
                out.push_back(skipped(CheckId::C2, "semigroup", p,
                                      "distance between distinct points is only certified on round caps"));
                continue;
              }
              const double d = model_.is_round() ? geodesic_distance(model_, {ra, 0.0}, {rb, th}) : 0.0;
              const double H = harnack_factor(n(), rho(), s, t, d);
              out.push_back(judge(CheckId::C2, "semigroup", p, [&](std::size_t i) {
                const auto& sp = *truths_[i].spectrum;
                const double lhs = tf.fields[i].semigroup.at(s, ra).value;
                const double rhs = H * tf.fields[i].semigroup.at(t, rb).value;
                return Eval{lhs, rhs, tf.fields[i].tail(sp, s) + H * tf.fields[i].tail(sp, t)};
              }));
            }
          }
        }
      }
    }
  }

  // C3: p(s, x, y) <= H(s, t, d(y, z)) p(t, x, z).
  void harnack_kernel(std::vector<CheckResult>& out) const {
    const auto& rg = opt_.r_grid;
    std::vector<std::size_t> idx;
    const std::size_t m = rg.size();
    for (std::size_t q = 0; q < 4; ++q) idx.push_back(std::min(m - 1, q * (m - 1) / 3));
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    std::vector<double> angles{0.0};
    if (n() == 2) angles = {0.0, 0.5 * std::numbers::pi, std::numbers::pi};
    for (double t : opt_.t_grid) {
      const double s = 0.5 * t;
      for (std::size_t a : idx) {
        for (std::size_t b : idx) {
          for (std::size_t c : idx) {
            for (double thy : angles) {
              for (double thz : angles) {
                CheckParams p{.t = t, .s = s, .r1 = rg[a], .r2 = rg[b], .r3 = rg[c], .theta2 = thy, .theta3 = thz};
                if (!model_.is_round()) {
                  out.push_back(skipped(CheckId::C3, "kernel", p, "geodesic distance requires a round cap"));
                  continue;
                }
                const double d = geodesic_distance(model_, {rg[b], thy}, {rg[c], thz});
                const double H = harnack_factor(n(), rho(), s, t, d);
                out.push_back(judge(CheckId::C3, "kernel", p, [&](std::size_t i) {
                  const auto& tr = truths_[i];
                  const auto& sp = *tr.spectrum;
                  const KernelValue lhs = heat_kernel(sp, tr.samples[a], tr.samples[b], thy, s);
                  const KernelValue rhs = heat_kernel(sp, tr.samples[a], tr.samples[c], thz, t);
                  Eval e{lhs.value, H * rhs.value, lhs.tail_bound + H * rhs.tail_bound};
                  // off-diagonal values can be tiny; judge resolution against the diagonal scale
                  const double scale = ondiag_bounds(n(), rho(), sp.volume(), s).lower;
                  if (auto why = kernel_resolved(sp, s, scale)) e.skip = why;
                  return e;
                }));
              }
            }
          }
        }
      }
    }
  }

  // C4: on-diagonal sandwich; the lower side only at interior points.
  void ondiag(std::vector<CheckResult>& out) const {
    for (double t : opt_.t_grid) {
      const OnDiagonalBounds b = ondiag_bounds(n(), rho(), geo_.volume, t);
      for (std::size_t ri = 0; ri < opt_.r_grid.size(); ++ri) {
        const double r = opt_.r_grid[ri];
        const CheckParams p{.t = t, .r1 = r};
        const auto diag = [&](std::size_t i) {
          const auto& tr = truths_[i];
          return heat_kernel(*tr.spectrum, tr.samples[ri], tr.samples[ri], 0.0, t);
        };
        if (r < R()) {
          out.push_back(judge(CheckId::C4, "lower", p, [&](std::size_t i) {
            const KernelValue k = diag(i);
            Eval e{b.lower, k.value, k.tail_bound};
            if (auto why = kernel_resolved(*truths_[i].spectrum, t, k.value)) e.skip = why;
            return e;
          }));
        } else {
          out.push_back(skipped(CheckId::C4, "lower", p,
                                "boundary point: the short-time lower-bound diagnostic is run at interior points"));
        }
        out.push_back(judge(CheckId::C4, "upper", p, [&](std::size_t i) {
          const KernelValue k = diag(i);
          Eval e{k.value, b.upper, k.tail_bound};
          if (auto why = kernel_resolved(*truths_[i].spectrum, t, k.value)) e.skip = why;
          return e;
        }));
      }
    }
  }

  // C5: p(t, x, x) <= (1 + e^{-2 rho t/3})^{n/2} e^{n/2} / mu(B(x, sqrt(r(t)))), x = pole.
  void refined_ball(std::vector<CheckResult>& out) const {
    for (double t : opt_.t_grid) {
      for (std::size_t ri = 0; ri < opt_.r_grid.size(); ++ri) {
        const double r = opt_.r_grid[ri];
        const CheckParams p{.t = t, .r1 = r};
        if (r != 0.0) {
          out.push_back(skipped(CheckId::C5, "ball", p,
                                "ball volume is evaluated only for balls centered at the pole"));
          continue;
        }
        const double radius = std::sqrt(refined_radius_sq(n(), rho(), t));
        const double bound = ball_upper_prefactor(n(), rho(), ball_volume_at_pole(model_, radius), t);
        out.push_back(judge(CheckId::C5, "ball", p, [&](std::size_t i) {
          const auto& tr = truths_[i];
          const KernelValue k = heat_kernel(*tr.spectrum, tr.samples[ri], tr.samples[ri], 0.0, t);
          Eval e{k.value, bound, k.tail_bound};
          if (auto why = kernel_resolved(*tr.spectrum, t, k.value)) e.skip = why;
          return e;
        }));
      }
    }
  }

  // C6: p(t, x, x) <= diameter-corollary bound.
  void diameter_corollary(std::vector<CheckResult>& out) const {
    for (double t : opt_.t_grid) {
      for (std::size_t ri = 0; ri < opt_.r_grid.size(); ++ri) {
        const CheckParams p{.t = t, .r1 = opt_.r_grid[ri]};
        if (!geo_.diameter_certified) {
          out.push_back(skipped(CheckId::C6, "diameter", p, "diameter is only certified on round caps"));
          continue;
        }
        const RefinedUpper ru = refined_upper(n(), rho(), geo_.volume, geo_.diameter, t);
        out.push_back(judge(CheckId::C6, to_string(ru.branch), p, [&](std::size_t i) {
          const auto& tr = truths_[i];
          const KernelValue k = heat_kernel(*tr.spectrum, tr.samples[ri], tr.samples[ri], 0.0, t);
          Eval e{k.value, ru.value, k.tail_bound};
          if (auto why = kernel_resolved(*tr.spectrum, t, k.value)) e.skip = why;
          return e;
        }));
      }
    }
  }

  // C10: d/dt P_t g = Delta P_t g >= P_t(Delta g) for g with g'(R) <= 0.
  void submartingale(std::vector<CheckResult>& out) const {
    for (double eps : opt_.eps_family) {
      std::vector<RadialField> g_fields, lap_fields;
      for (const auto& tr : truths_) {
        const auto& mesh = tr.spectrum->mesh();
        g_fields.emplace_back(*tr.spectrum, sample_on_mesh(mesh, [&](double r) {
                                return decreasing_family(eps, R(), r).value;
                              }));
        lap_fields.emplace_back(*tr.spectrum, sample_on_mesh(mesh, [&](double r) {
                                  return radial_laplacian(model_, r, decreasing_family(eps, R(), r));
                                }));
      }
      for (double t : opt_.t_grid) {
        for (double r : opt_.r_grid) {
          out.push_back(judge(CheckId::C10, "submartingale", {.t = t, .r1 = r, .eps = eps}, [&](std::size_t i) {
            const auto& s = *truths_[i].spectrum;
            const double lhs = lap_fields[i].semigroup.at(t, r).value;
            const double rhs = g_fields[i].semigroup.at(t, r).laplacian;
            return Eval{lhs, rhs, lap_fields[i].tail(s, t) + g_fields[i].laplacian_tail(s, t)};
          }));
        }
      }
    }
  }

  // C11: |grad P_t f|^2 <= e^{-2 rho t} P_t |grad f|^2.
  void qian(std::vector<CheckResult>& out) const {
    for (double eps : opt_.eps_family) {
      std::vector<RadialField> f_fields, grad_fields;
      for (const auto& tr : truths_) {
        const auto& mesh = tr.spectrum->mesh();
        f_fields.emplace_back(*tr.spectrum, sample_on_mesh(mesh, [&](double r) {
                                return neumann_family(eps, R(), r).value;
                              }));
        grad_fields.emplace_back(*tr.spectrum, sample_on_mesh(mesh, [&](double r) {
                                   const double d = neumann_family(eps, R(), r).d1;
                                   return d * d;
                                 }));
      }
      for (double t : opt_.t_grid) {
        const double decay = std::exp(-2.0 * rho() * t);
        for (double r : opt_.r_grid) {
          out.push_back(judge(CheckId::C11, "contraction", {.t = t, .r1 = r, .eps = eps}, [&](std::size_t i) {
            const auto& s = *truths_[i].spectrum;
            const double dr = f_fields[i].semigroup.at(t, r).dr;
            const double rhs = decay * grad_fields[i].semigroup.at(t, r).value;
            const double e1 = f_fields[i].gradient_tail(s, t);
            return Eval{dr * dr, rhs, 2.0 * std::abs(dr) * e1 + e1 * e1 + decay * grad_fields[i].tail(s, t)};
          }));
        }
      }
    }
  }

  // C7: trace sandwich.
  void trace_sandwich(std::vector<CheckResult>& out) const {
    for (double t : opt_.t_grid) {
      const TraceBounds b = trace_bounds(n(), rho(), geo_.volume, t);
      const CheckParams p{.t = t};
      const auto trace = [&](std::size_t i) { return heat_trace(*truths_[i].spectrum, t); };
      out.push_back(judge(CheckId::C7, "lower", p, [&](std::size_t i) {
        const TraceValue tv = trace(i);
        Eval e{b.lower, tv.value, tv.tail_bound};
        if (tv.truncation_warning) e.skip = "trace tail exceeds 1% of the partial sum";
        return e;
      }));
      out.push_back(judge(CheckId::C7, "upper", p, [&](std::size_t i) {
        const TraceValue tv = trace(i);
        Eval e{tv.value, b.upper, tv.tail_bound};
        if (tv.truncation_warning) e.skip = "trace tail exceeds 1% of the partial sum";
        return e;
      }));
    }
  }

  // C8: bound1(k) <= lambda_k for every k; bound2(k) <= lambda_k where valid.
  void eigen_bounds(std::vector<CheckResult>& out) const {
    for (int k = 0; k <= opt_.k_max; ++k) {
      const CheckParams p{.k = static_cast<double>(k)};
      const auto lambda = [&](std::size_t i) -> std::optional<double> {
        const auto& sp = *truths_[i].spectrum;
        if (static_cast<std::size_t>(k) >= sp.sorted().size()) return std::nullopt;
        return sp.eigenvalue(k);
      };
      const auto emit = [&](const std::string& variant, double bound) {
        out.push_back(judge(CheckId::C8, variant, p, [&](std::size_t i) {
          Eval e;
          e.lhs = bound;
          if (auto lam = lambda(i)) {
            e.rhs = *lam;
          } else {
            e.skip = "k beyond the certified spectrum (lambda_cut)";
          }
          return e;
        }));
      };
      emit("bound1", eigen_bound1(n(), rho(), k));
      if (bound2_valid(n(), k)) {
        if (!geo_.diameter_certified) {
          out.push_back(skipped(CheckId::C8, "bound2", p, "diameter is only certified on round caps"));
        } else {
          emit("bound2", *eigen_bound2(n(), rho(), geo_.diameter, k));
        }
      }
    }
  }

  // C9: ratios to the leading large-k terms, and a Weyl-law sanity band.
  void asymptotic(std::vector<CheckResult>& out) const {
    const double k = opt_.asym_k;
    const double lo = 1.0 - opt_.asym_band, hi = 1.0 + opt_.asym_band;
    const auto band = [&](std::string variant, double ratio, double blo, double bhi) {
      CheckResult res;
      res.id = CheckId::C9;
      res.variant = std::move(variant);
      res.params.k = k;
      res.lhs = ratio;
      res.rhs = ratio < 0.5 * (blo + bhi) ? blo : bhi;
      res.margin = std::min(ratio - blo, bhi - ratio);
      res.slack = opt_.slack_rel * std::abs(res.rhs);
      res.status = res.margin >= -res.slack ? Status::pass : Status::fail;
      return res;
    };
    const double diam = geo_.diameter_certified ? geo_.diameter : comparison_diameter(rho(), n());
    const Asymptotics as = asymptotics(n(), rho(), geo_.volume, diam, k);
    out.push_back(band("bound1_ratio", eigen_bound1(n(), rho(), k) / as.lb1_asym, lo, hi));
    if (geo_.diameter_certified) {
      if (auto b2 = eigen_bound2(n(), rho(), geo_.diameter, k)) {
        out.push_back(band("bound2_ratio", *b2 / as.lb2_leading, lo, hi));
      }
    } else {
      out.push_back(skipped(CheckId::C9, "bound2_ratio", {.k = k}, "diameter is only certified on round caps"));
    }
    const auto& sp = *truths_[0].spectrum;
    if (sp.sorted().size() < 2) return;
    const std::size_t kk = std::min<std::size_t>(static_cast<std::size_t>(opt_.k_max), sp.sorted().size() - 1);
    const Asymptotics aw = asymptotics(n(), rho(), geo_.volume, diam, static_cast<double>(kk));
    CheckResult w = band("weyl_ratio", sp.eigenvalue(kk) / aw.weyl, 0.5, 2.0);
    w.params.k = static_cast<double>(kk);
    out.push_back(w);
  }

  const WarpedProductModel& model_;
  const GeometryReport& geo_;
  const VerifyOptions& opt_;
  std::vector<Truth> truths_;
};

}  // namespace detail

inline std::vector<CheckResult> run_pointwise_checks(const WarpedProductModel& model, const GeometryReport& geo,
                                                     const SpectrumTable& spectrum, const SpectrumTable* coarse,
                                                     const VerifyOptions& opt) {
  if (!(geo.rho_eff > 0.0) || geo.pi_min < 0.0) {
    throw GeometryError("Ric >= rho > 0 and convex boundary", "checks require a certified model");
  }
  return detail::Runner(model, geo, spectrum, coarse, opt).pointwise();
}

inline std::vector<CheckResult> run_spectrum_checks(const WarpedProductModel& model, const GeometryReport& geo,
                                                    const SpectrumTable& spectrum, const SpectrumTable* coarse,
                                                    const VerifyOptions& opt) {
  if (!(geo.rho_eff > 0.0) || geo.pi_min < 0.0) {
    throw GeometryError("Ric >= rho > 0 and convex boundary", "checks require a certified model");
  }
  return detail::Runner(model, geo, spectrum, coarse, opt).spectral();
}

/// Per-check aggregation in check-id order.
inline std::vector<CheckSummary> summarize(const std::vector<CheckResult>& results) {
  std::vector<CheckSummary> out;
  for (CheckId id : kAllChecks) {
    CheckSummary s;
    s.id = id;
    for (std::size_t i = 0; i < results.size(); ++i) {
      const auto& r = results[i];
      if (r.id != id) continue;
      ++s.count;
      if (r.status == Status::skipped) {
        ++s.skipped;
        continue;
      }
      r.status == Status::pass ? ++s.passed : ++s.failed;
      // worst instance: smallest margin
      if (!s.min_margin || r.margin < *s.min_margin) {
        s.min_margin = r.margin;
        s.worst = i;
      }
    }
    if (s.count > 0) out.push_back(s);
  }
  return out;
}

/// Model, certified geometry and spectra for a configuration.
struct Prepared {
  WarpedProductModel model;
  GeometryReport geometry;
  SpectrumTable spectrum;
  std::optional<SpectrumTable> coarse;
};

inline Prepared prepare(const RunConfig& cfg, bool with_coarse) {
  WarpedProductModel model = cfg.model.build();
  const GeometryReport geo = curvature_report(model);
  SpectrumTable fine =
      assemble_spectrum(model, geo.rho_eff, cfg.solver.l_max, cfg.solver.mesh_points, cfg.solver.modes_per_l);
  std::optional<SpectrumTable> coarse;
  if (with_coarse && cfg.solver.refine && cfg.solver.mesh_points / 2 >= 64) {
    coarse = assemble_spectrum(model, geo.rho_eff, cfg.solver.l_max, cfg.solver.mesh_points / 2,
                               cfg.solver.modes_per_l);
  }
  return Prepared{std::move(model), geo, std::move(fine), std::move(coarse)};
}

inline VerifyOptions resolve_options(const RunConfig& cfg, const WarpedProductModel& model,
                                     const GeometryReport& geo) {
  VerifyOptions opt;
  opt.t_grid = cfg.grids.t.resolve(geo.rho_eff);
  opt.r_grid = default_r_grid(model.r_max(), cfg.grids.r_count);
  opt.k_max = cfg.grids.k_max;
  opt.checks = cfg.checks;
  opt.test_samples = cfg.test_samples;
  return opt;
}

inline SpectrumInfo spectrum_info(const SpectrumTable& s, const std::optional<SpectrumTable>& coarse) {
  SpectrumInfo info;
  info.n = s.dimension();
  info.rho_eff = s.rho_eff();
  info.mesh_points = s.truncation().mesh_points;
  info.l_max = s.truncation().l_max;
  info.modes_per_l = s.truncation().modes_per_l;
  info.lambda_cut = s.truncation().lambda_cut;
  info.modes = s.modes().size();
  info.eigenvalues = s.sorted().size();
  if (coarse) info.coarse_mesh_points = coarse->truncation().mesh_points;
  return info;
}

/// Run every enabled check against an already prepared model.
inline VerificationReport run_suite(const RunConfig& cfg, const Prepared& prep) {
  const VerifyOptions opt = resolve_options(cfg, prep.model, prep.geometry);
  const SpectrumTable* coarse = prep.coarse ? &*prep.coarse : nullptr;

  VerificationReport rep;
  rep.config = to_json(cfg);
  rep.geometry = prep.geometry;
  rep.spectrum = spectrum_info(prep.spectrum, prep.coarse);
  rep.t_grid = opt.t_grid;
  rep.r_grid = opt.r_grid;
  rep.results = run_pointwise_checks(prep.model, prep.geometry, prep.spectrum, coarse, opt);
  auto spec = run_spectrum_checks(prep.model, prep.geometry, prep.spectrum, coarse, opt);
  rep.results.insert(rep.results.end(), spec.begin(), spec.end());
  std::stable_sort(rep.results.begin(), rep.results.end(),
                   [](const CheckResult& a, const CheckResult& b) { return a.id < b.id; });
  rep.summaries = summarize(rep.results);
  rep.verdict_pass = std::none_of(rep.results.begin(), rep.results.end(),
                                  [](const CheckResult& r) { return r.status == Status::fail; });
  if (cfg.enabled(CheckId::C3)) {
    rep.notes.push_back("C3 samples meridian triples (and planar triples for n = 2) only");
  }
  if (cfg.enabled(CheckId::C9)) {
    rep.notes.push_back("C9 bound2_ratio compares against the leading term n^{-1/n} times the stated lb2 asymptotic");
  }
  return rep;
}

/// Build, certify, solve, and run every enabled check.
inline VerificationReport run_suite(const RunConfig& cfg) { return run_suite(cfg, prepare(cfg, true)); }

// ---- JSON ------------------------------------------------------------------

inline json to_json(const CheckParams& p) {
  json j = json::object();
  const auto put = [&](const char* k, const std::optional<double>& v) {
    if (v) j[k] = *v;
  };
  put("t", p.t);
  put("s", p.s);
  put("r1", p.r1);
  put("r2", p.r2);
  put("r3", p.r3);
  put("theta2", p.theta2);
  put("theta3", p.theta3);
  put("k", p.k);
  put("eps", p.eps);
  return j;
}

inline CheckParams params_from_json(const json& j) {
  CheckParams p;
  const auto get = [&](const char* k, std::optional<double>& v) {
    if (j.contains(k)) v = j.at(k).get<double>();
  };
  get("t", p.t);
  get("s", p.s);
  get("r1", p.r1);
  get("r2", p.r2);
  get("r3", p.r3);
  get("theta2", p.theta2);
  get("theta3", p.theta3);
  get("k", p.k);
  get("eps", p.eps);
  return p;
}

inline json to_json(const VerificationReport& r) {
  json results = json::array();
  for (const auto& c : r.results) {
    json row = {{"check_id", to_string(c.id)}, {"variant", c.variant}, {"params", to_json(c.params)},
                {"lhs", c.lhs},                {"rhs", c.rhs},         {"margin", c.margin},
                {"slack", c.slack},            {"status", to_string(c.status)}};
    if (!c.reason.empty()) row["reason"] = c.reason;
    results.push_back(std::move(row));
  }
  json summaries = json::array();
  for (const auto& s : r.summaries) {
    json row = {{"check_id", to_string(s.id)}, {"count", s.count},    {"passed", s.passed},
                {"failed", s.failed},         {"skipped", s.skipped}, {"min_margin", nullptr},
                {"worst", nullptr}};
    if (s.min_margin) row["min_margin"] = *s.min_margin;
    if (s.worst) row["worst"] = *s.worst;
    summaries.push_back(std::move(row));
  }
  json spectrum = {{"n", r.spectrum.n},
                   {"rho_eff", r.spectrum.rho_eff},
                   {"mesh_points", r.spectrum.mesh_points},
                   {"l_max", r.spectrum.l_max},
                   {"modes_per_l", r.spectrum.modes_per_l},
                   {"lambda_cut", r.spectrum.lambda_cut},
                   {"modes", r.spectrum.modes},
                   {"eigenvalues", r.spectrum.eigenvalues},
                   {"coarse_mesh_points", nullptr}};
  if (r.spectrum.coarse_mesh_points) spectrum["coarse_mesh_points"] = *r.spectrum.coarse_mesh_points;
  return {{"config", r.config},
          {"geometry",
           {{"rho_eff", r.geometry.rho_eff},
            {"pi_min", r.geometry.pi_min},
            {"volume", r.geometry.volume},
            {"diameter", r.geometry.diameter},
            {"diameter_certified", r.geometry.diameter_certified}}},
          {"spectrum", spectrum},
          {"t_grid", r.t_grid},
          {"r_grid", r.r_grid},
          {"summaries", summaries},
          {"results", results},
          {"notes", r.notes},
          {"verdict", r.verdict_pass ? "pass" : "fail"}};
}

inline VerificationReport report_from_json(const json& j) {
  VerificationReport r;
  r.config = j.at("config");
  const json& g = j.at("geometry");
  r.geometry = {g.at("rho_eff").get<double>(), g.at("pi_min").get<double>(), g.at("volume").get<double>(),
                g.at("diameter").get<double>(), g.at("diameter_certified").get<bool>()};
  const json& s = j.at("spectrum");
  r.spectrum.n = s.at("n").get<int>();
  r.spectrum.rho_eff = s.at("rho_eff").get<double>();
  r.spectrum.mesh_points = s.at("mesh_points").get<int>();
  r.spectrum.l_max = s.at("l_max").get<int>();
  r.spectrum.modes_per_l = s.at("modes_per_l").get<int>();
  r.spectrum.lambda_cut = s.at("lambda_cut").get<double>();
  r.spectrum.modes = s.at("modes").get<std::size_t>();
  r.spectrum.eigenvalues = s.at("eigenvalues").get<std::size_t>();
  if (!s.at("coarse_mesh_points").is_null()) r.spectrum.coarse_mesh_points = s.at("coarse_mesh_points").get<int>();
  r.t_grid = j.at("t_grid").get<std::vector<double>>();
  r.r_grid = j.at("r_grid").get<std::vector<double>>();
  for (const auto& row : j.at("summaries")) {
    CheckSummary cs;
    cs.id = *parse_check_id(row.at("check_id").get<std::string>());
    cs.count = row.at("count").get<std::size_t>();
    cs.passed = row.at("passed").get<std::size_t>();
    cs.failed = row.at("failed").get<std::size_t>();
    cs.skipped = row.at("skipped").get<std::size_t>();
    if (!row.at("min_margin").is_null()) cs.min_margin = row.at("min_margin").get<double>();
    if (!row.at("worst").is_null()) cs.worst = row.at("worst").get<std::size_t>();
    r.summaries.push_back(cs);
  }
  for (const auto& row : j.at("results")) {
    CheckResult c;
    c.id = *parse_check_id(row.at("check_id").get<std::string>());
    c.variant = row.at("variant").get<std::string>();
    c.params = params_from_json(row.at("params"));
    c.lhs = row.at("lhs").get<double>();
    c.rhs = row.at("rhs").get<double>();
    c.margin = row.at("margin").get<double>();
    c.slack = row.at("slack").get<double>();
    c.status = parse_status(row.at("status").get<std::string>());
    if (row.contains("reason")) c.reason = row.at("reason").get<std::string>();
    r.results.push_back(std::move(c));
  }
  r.notes = j.at("notes").get<std::vector<std::string>>();
  r.verdict_pass = j.at("verdict").get<std::string>() == "pass";
  return r;
}

}  // namespace nhk
