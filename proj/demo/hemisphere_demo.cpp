// Neumann spectrum and heat trace of the unit hemisphere against the analytic bounds.
#include <cstdio>

#include "nhk/bounds.hpp"
#include "nhk/spectral.hpp"

int main() {
  const nhk::WarpedProductModel cap = nhk::make_round_cap(2, 1.0, 1.0);
  const nhk::GeometryReport geo = nhk::curvature_report(cap);
  const nhk::SpectrumTable spectrum = nhk::assemble_spectrum(cap, geo.rho_eff, 40, 2000);

  std::printf("volume %.9f  diameter %.9f  %zu eigenvalues below %.1f\n", geo.volume, geo.diameter,
              spectrum.sorted().size(), spectrum.truncation().lambda_cut);
  std::printf("\n  k    lambda_k      bound1\n");
  for (int k = 0; k < 10; ++k) {
    std::printf("%3d  %10.6f  %10.6f\n", k, spectrum.eigenvalue(k), nhk::eigen_bound1(2, geo.rho_eff, k));
  }
  std::printf("\n     t     lower       trace     upper\n");
  for (double t : {0.25, 0.5, 1.0, 2.0}) {
    const nhk::TraceBounds b = nhk::trace_bounds(2, geo.rho_eff, geo.volume, t);
    std::printf("%6.2f  %9.6f  %9.6f  %9.6f\n", t, b.lower, nhk::heat_trace(spectrum, t).value, b.upper);
  }
  return 0;
}
