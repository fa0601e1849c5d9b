// Walks the pipeline by hand: length, bounds, minimizer, orbit, integration.

#include <cstdio>

#include "eight/eight.hpp"

using namespace eight;

int main() {
  const double ell0 = euler_length().ell0;
  const BoundsReport b = bounds_report(ell0);
  std::printf("ell0 = %.15f   (pi/ell0 = %.12f)\n", ell0, kPi / ell0);
  std::printf("A2 = %.10f  A3 = %.10f  a = %.10f  gate %s\n", b.A2, b.A3, b.a, b.gate_passed ? "passed" : "failed");

  const MinimizeReport m = minimize(reduced_test_path(b.I0_star, b.T, 256), 1e-10, 10000);
  std::printf("minimum action %.10f after %zu iterations, min separation %.4f\n", m.action, m.iterations,
              m.min_separation);

  const Orbit o = build_orbit(m.path);
  std::printf("orbit period %.10f, choreography residual %.1e\n", o.Tbar, choreography_residual(o));

  const Trajectory tr = integrate(simo_initial_state(), kSimoPeriod, 1e-12, 2);
  std::printf("integrated defect %.2e, energy drift %.1e\n", periodicity_defect(tr.final_state(), tr.initial()),
              tr.energy_drift());

  const CrossValidation cv = cross_validate(o, tr, kSimoPeriod);
  std::printf("minimizer vs integration: Hausdorff %.1e after rotating by %.6f\n", cv.hausdorff, cv.rotation);

  std::FILE* f = std::fopen("figure_eight.svg", "w");
  if (f) {
    std::fputs(orbit_svg(o).c_str(), f);
    std::fclose(f);
    std::puts("wrote figure_eight.svg");
  }
  return 0;
}
