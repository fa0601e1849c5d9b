#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "eight/integrator.hpp"

using namespace eight;

namespace {

// Rigid rotation of the equilateral triangle of circumradius R (a central
// configuration): ω² = √3/(3R³).
State lagrange_state(double R, double t) {
  const double w = std::sqrt(std::sqrt(3.0) / (3.0 * R * R * R));
  State s;
  for (int i = 0; i < 3; ++i) {
    const double a = w * t + 2.0 * kPi * i / 3.0;
    s.q[i] = {R * std::cos(a), R * std::sin(a)};
    s.v[i] = {-R * w * std::sin(a), R * w * std::cos(a)};
  }
  return s;
}

// Relative two-body motion r̈ = −2r/|r|³ for unit masses.
struct Kepler {
  void operator()(const std::array<double, 4>& y, std::array<double, 4>& d, double) const {
    const double r3 = std::pow(y[0] * y[0] + y[1] * y[1], 1.5);
    d = {y[2], y[3], -2.0 * y[0] / r3, -2.0 * y[1] / r3};
  }
};

// Error after one revolution of the circular orbit with m equal steps.
double kepler_fixed_step_error(std::size_t m) {
  const double r = 1.0, w = std::sqrt(2.0 / (r * r * r)), P = 2.0 * kPi / w;
  std::vector<double> stops(m + 1);
  for (std::size_t j = 0; j <= m; ++j) stops[j] = P * j / m;
  IntegratorStats st;
  std::array<double, 4> last{};
  // a loose tolerance so that every step is a full grid step
  detail::drive_rkf78<4>(Kepler{}, std::array<double, 4>{r, 0.0, 0.0, r * w}, 0.0, stops, 1.0, st,
                         [&](double, const std::array<double, 4>& y, std::ptrdiff_t) { last = y; }, P / m);
  EXPECT_EQ(st.steps, m);
  EXPECT_EQ(st.rejected, 0u);
  return std::hypot(last[0] - r, last[1]);
}

}  // namespace

TEST(Accelerations, EquilateralIsCentral) {
  const State s = lagrange_state(1.0 / std::sqrt(3.0), 0.0);  // I = 1
  const Configuration a = accelerations(s.q);
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(cross(a[i], s.q[i]), 0.0, 1e-15);
    EXPECT_LT(dot(a[i], s.q[i]), 0.0);
    EXPECT_NEAR(norm(a[i]), norm(a[0]), 1e-14);
  }
  EXPECT_LT(norm(center_sum(a)), 1e-14);
}

TEST(Accelerations, EulerMidpointFeelsNoForce) {
  const Configuration c{{Vec2{0.7, -0.2}, Vec2{-0.7, 0.2}, Vec2{}}};
  EXPECT_LT(norm(accelerations(c)[2]), 1e-16);
}

TEST(Accelerations, GradientOfPotential) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  for (int t = 0; t < 10; ++t) {
    Configuration c{{Vec2{g(rng), g(rng)}, Vec2{g(rng), g(rng)}, Vec2{g(rng), g(rng)}}};
    const Configuration a = accelerations(c);
    const double e = 1e-6;
    for (int i = 0; i < 3; ++i) {
      for (int k = 0; k < 2; ++k) {
        Configuration p = c, m = c;
        (k == 0 ? p[i].x : p[i].y) += e;
        (k == 0 ? m[i].x : m[i].y) -= e;
        const double fd = (potential(p) - potential(m)) / (2 * e);
        const double an = k == 0 ? a[i].x : a[i].y;
        EXPECT_NEAR(an, fd, 1e-7 * std::max(1.0, std::abs(fd)));
      }
    }
    EXPECT_LT(norm(center_sum(a)), 1e-12 * (1.0 + norm(a[0])));
  }
  const Configuration hit{{Vec2{1, 0}, Vec2{1, 0}, Vec2{}}};
  EXPECT_THROW(accelerations(hit), CollisionError);
}

TEST(AccelerationJacobian, MatchesFiniteDifferences) {
  const Configuration c{{Vec2{0.9, 0.1}, Vec2{-0.4, 0.7}, Vec2{-0.5, -0.8}}};
  const auto J = acceleration_jacobian(c);
  const double e = 1e-6;
  for (int j = 0; j < 3; ++j) {
    for (int k = 0; k < 2; ++k) {
      Configuration p = c, m = c;
      (k == 0 ? p[j].x : p[j].y) += e;
      (k == 0 ? m[j].x : m[j].y) -= e;
      const Configuration ap = accelerations(p), am = accelerations(m);
      for (int i = 0; i < 3; ++i) {
        EXPECT_NEAR(J[i][j][k], (ap[i].x - am[i].x) / (2 * e), 1e-7);
        EXPECT_NEAR(J[i][j][2 + k], (ap[i].y - am[i].y) / (2 * e), 1e-7);
      }
    }
  }
}

TEST(SimoInitialState, PublishedData) {
  const State s = simo_initial_state();
  const Invariants iv = invariants(s);
  EXPECT_NEAR(iv.I, 2.0, 1e-7);
  EXPECT_EQ(s.q[2], Vec2{});
  EXPECT_EQ(s.q[0], -s.q[1]);
  EXPECT_EQ(s.v[0], s.v[1]);
  EXPECT_EQ(iv.J, 0.0);
  EXPECT_EQ(iv.C, 0.0);
  EXPECT_NEAR(iv.H, -1.2871, 5e-5);
  EXPECT_EQ(norm(center_sum(s.v)), 0.0);
}

TEST(Integrate, SimoOrbitOnePeriod) {
  const State s0 = simo_initial_state();
  const Trajectory tr = integrate(s0, kSimoPeriod, 1e-12, 500);
  EXPECT_LT(periodicity_defect(tr.final_state(), s0), 1e-5);
  EXPECT_LT(tr.energy_drift(), 1e-9);
  EXPECT_LT(tr.angular_momentum_drift(), 1e-9);
  EXPECT_LT(tr.momentum_drift(), 1e-12);
  for (const Invariants& iv : tr.invariants_log) {
    EXPECT_NEAR(iv.H, invariants(s0).H, 1e-9);
    EXPECT_NEAR(iv.C, 0.0, 1e-9);
  }
  EXPECT_EQ(tr.t_grid.size(), 500u);
  EXPECT_EQ(tr.t_grid.back(), kSimoPeriod);
  EXPECT_EQ(tr.stats.tol, 1e-12);
}

TEST(Integrate, LagrangeRotationMatchesClosedForm) {
  const double R = 0.8;
  const double t_end = 5.0;
  const Trajectory tr = integrate(lagrange_state(R, 0.0), t_end, 1e-12, 11);
  for (std::size_t j = 0; j < tr.t_grid.size(); ++j) {
    EXPECT_LT(max_abs_difference(tr.states[j], lagrange_state(R, tr.t_grid[j])), 1e-10) << j;
  }
}

TEST(Integrate, AdaptiveStepsFollowTolerance) {
  const State s0 = simo_initial_state();
  const Trajectory loose = integrate(s0, kSimoPeriod, 1e-8), tight = integrate(s0, kSimoPeriod, 1e-12);
  EXPECT_GT(tight.stats.steps, loose.stats.steps);
  const Trajectory ref = integrate(s0, kSimoPeriod, 1e-14);
  EXPECT_LT(periodicity_defect(tight.final_state(), ref.final_state()),
            periodicity_defect(loose.final_state(), ref.final_state()));
}

TEST(Integrate, TimeReversal) {
  const State s0 = simo_initial_state();
  const double one_way = periodicity_defect(integrate(s0, kSimoPeriod, 1e-12).final_state(), s0);
  const State half = integrate(s0, kSimoPeriod / 2, 1e-12).final_state();
  const State back = integrate(half, -kSimoPeriod / 2, 1e-12).final_state();
  EXPECT_LT(periodicity_defect(back, s0), 10.0 * one_way);
}

TEST(Integrate, EighthOrderOnCircularKepler) {
  const double e1 = kepler_fixed_step_error(12), e2 = kepler_fixed_step_error(24);
  EXPECT_GE(std::log2(e1 / e2), 7.5);
}

TEST(Integrate, DenseOutput) {
  const State s0 = simo_initial_state();
  const Trajectory tr = integrate(s0, kSimoPeriod, 1e-12, 2);
  const Trajectory fine = integrate(s0, kSimoPeriod, 1e-12, 37);
  double eq = 0.0, ec = 0.0;
  Trajectory cubic = tr;
  cubic.dense_order = DenseOrder::cubic;
  for (std::size_t j = 1; j + 1 < fine.t_grid.size(); ++j) {
    eq = std::max(eq, max_abs_difference(tr.state_at(fine.t_grid[j]), fine.states[j]));
    ec = std::max(ec, max_abs_difference(cubic.state_at(fine.t_grid[j]), fine.states[j]));
  }
  EXPECT_LT(eq, 1e-6);
  EXPECT_LT(eq, ec);
  EXPECT_LT(max_abs_difference(tr.state_at(0.0), s0), 1e-15);
  EXPECT_THROW(tr.state_at(7.0), DomainError);
}

TEST(Integrate, DenseOutputOnLagrangeRotation) {
  const double R = 1.1;
  Trajectory tr = integrate(lagrange_state(R, 0.0), 4.0, 1e-13, 2);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 4.0);
  double eq = 0.0, ec = 0.0;
  std::vector<double> ts(50);
  for (double& t : ts) t = u(rng);
  for (double t : ts) eq = std::max(eq, max_abs_difference(tr.state_at(t), lagrange_state(R, t)));
  tr.dense_order = DenseOrder::cubic;
  for (double t : ts) ec = std::max(ec, max_abs_difference(tr.state_at(t), lagrange_state(R, t)));
  EXPECT_LT(eq, 1e-7);
  EXPECT_LT(eq, ec);
  // backward runs interpolate too
  const Trajectory back = integrate(lagrange_state(R, 0.0), -2.0, 1e-13, 2);
  EXPECT_LT(max_abs_difference(back.state_at(-1.3), lagrange_state(R, -1.3)), 1e-7);
}

TEST(Integrate, Errors) {
  const State s0 = simo_initial_state();
  EXPECT_THROW(integrate(s0, 1.0, 0.0), DomainError);
  EXPECT_THROW(integrate(s0, 0.0, 1e-10), DomainError);
  EXPECT_THROW(integrate(s0, 1.0, 1e-10, 1), DomainError);
  State hit = s0;
  hit.q[2] = hit.q[0];
  EXPECT_THROW(integrate(hit, 1.0, 1e-10), CollisionError);
  // head-on fall from rest at unit separation: collision near t = π/4
  const State fall{{{Vec2{0.5, 0}, Vec2{-0.5, 0}, Vec2{0, 40}}}, {}};
  try {
    integrate(fall, 2.0, 1e-12);
    FAIL() << "expected step underflow";
  } catch (const StepUnderflowError& e) {
    EXPECT_GT(e.time(), 0.75);
    EXPECT_LT(e.time(), 0.8);
  }
}

TEST(Monodromy, SimoOrbitIsElliptic) {
  const MonodromyResult m = monodromy(simo_initial_state(), kSimoPeriod, 1e-12);
  EXPECT_NEAR(m.determinant(), 1.0, 1e-6);
  EXPECT_LT(m.max_modulus_deviation(), 1e-3);
  EXPECT_GE(m.unit_count(1e-4), 4u);
  // reciprocal-conjugate pairing: λ and 1/λ̄ both appear
  for (const auto& l : m.eigenvalues) {
    const std::complex<double> r = 1.0 / std::conj(l);
    double best = 1e9;
    for (const auto& k : m.eigenvalues) best = std::min(best, std::abs(k - r));
    EXPECT_LT(best, 1e-3);
  }
  EXPECT_LT(periodicity_defect(m.final_state, integrate(simo_initial_state(), kSimoPeriod, 1e-12).final_state()),
            1e-9);
}

TEST(Monodromy, ShortTimeMatchesFiniteDifferences) {
  const State s0 = simo_initial_state();
  const double t = 0.3;
  const MonodromyResult m = monodromy(s0, t, 1e-13);
  const double e = 1e-6;
  for (int c = 0; c < 12; ++c) {
    PhaseVector yp = to_phase(s0), ym = yp;
    yp[c] += e, ym[c] -= e;
    const PhaseVector fp = to_phase(integrate(from_phase(yp), t, 1e-13).final_state());
    const PhaseVector fm = to_phase(integrate(from_phase(ym), t, 1e-13).final_state());
    for (int i = 0; i < 12; ++i) EXPECT_NEAR(m.matrix(i, c), (fp[i] - fm[i]) / (2 * e), 1e-6) << i << "," << c;
  }
}

TEST(RefinePeriod, SharpensPublishedPeriod) {
  const State s0 = simo_initial_state();
  const PeriodRefinement r = refine_period(s0, kSimoPeriod, 1e-12);
  EXPECT_NEAR(r.period, kSimoPeriod, 5e-8);
  EXPECT_LT(r.defect, r.guess_defect);
  for (double d : {-1e-4, 1e-4}) {
    EXPECT_LT(r.defect, periodicity_defect(integrate(s0, kSimoPeriod + d, 1e-12).final_state(), s0));
  }
}

TEST(RefinePeriod, ResidualConvergesAsToleranceShrinks) {
  // The residual is bounded below by the 8-digit rounding of the initial
  // data, so it converges to that floor rather than decreasing to zero.
  const State s0 = simo_initial_state();
  std::vector<double> d;
  for (double tol : {1e-11, 1e-12, 1e-13, 1e-14}) d.push_back(refine_period(s0, kSimoPeriod, tol).defect);
  for (std::size_t i = 2; i < d.size(); ++i) EXPECT_LT(std::abs(d[i] - d[i - 1]), std::abs(d[i - 1] - d[i - 2]));
  EXPECT_GT(d.back(), 1e-10);
  EXPECT_LT(d.back(), 1e-8);
}

TEST(RefinePeriod, RejectsBracketWithoutMinimum) {
  EXPECT_THROW(refine_period(simo_initial_state(), 1.0, 1e-10, 1e-2), ConvergenceError);
  EXPECT_THROW(refine_period(simo_initial_state(), 1e-4, 1e-10, 1e-3), DomainError);
}
