#include <gtest/gtest.h>

#include <cmath>
#include <algorithm>
#include <map>
#include <random>

#include "eight/action_bounds.hpp"
#include "eight/equipotential.hpp"
#include "eight/minimizer.hpp"

using namespace eight;

namespace {

DiscretePath seed(std::size_t n) {
  static const double ell0 = euler_length().ell0;
  static const EquipotentialArc arc;
  return reduced_test_path(optimal_test_action(ell0, kTwelfth).I0_star, kTwelfth, n, arc);
}

const MinimizeReport& converged(std::size_t n) {
  static std::map<std::size_t, MinimizeReport> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, minimize(seed(n), 1e-10, 100000)).first;
  return it->second;
}

// Isosceles-ended path perturbed away from the seed.
Vector perturbed(const PathCoordinates& pc, std::size_t n, unsigned s) {
  Vector v = pc.pack(seed(n));
  std::mt19937_64 rng(s);
  std::normal_distribution<double> g(0.0, 0.02);
  for (double& x : v) x += g(rng);
  return v;
}

}  // namespace

TEST(PathCoordinates, RoundTrip) {
  const DiscretePath p = seed(40);
  const PathCoordinates pc(p.T, 40);
  EXPECT_EQ(pc.size(), 4u * 40 + 1);
  const DiscretePath q = pc.unpack(pc.pack(p));
  for (std::size_t k = 0; k <= 40; ++k) EXPECT_LT(max_abs_difference(p.nodes[k], q.nodes[k]), 1e-14) << k;
}

TEST(PathCoordinates, UnpackSatisfiesBoundaryConditions) {
  const PathCoordinates pc(0.5, 16);
  for (unsigned s = 1; s <= 5; ++s) {
    const DiscretePath p = pc.unpack(perturbed(pc, 16, s));
    EXPECT_TRUE(starts_on_e3(p));
    EXPECT_TRUE(ends_on_m1(p));
  }
}

TEST(PathCoordinates, RejectsWrongBoundary) {
  DiscretePath p = seed(16);
  const PathCoordinates pc(p.T, 16);
  DiscretePath bad = p;
  bad.nodes[0][2] = Vec2{0.01, 0.0};
  EXPECT_THROW(pc.pack(bad), DomainError);
  bad = p;
  bad.nodes[16][0] += Vec2{0.05, 0.0};
  EXPECT_THROW(pc.pack(bad), DomainError);
  EXPECT_THROW(pc.pack(seed(8)), DomainError);
  EXPECT_THROW(PathCoordinates(0.0, 8), DomainError);
  EXPECT_THROW(PathCoordinates(1.0, 1), DomainError);
}

TEST(PathCoordinates, PullBackMatchesFiniteDifferences) {
  const std::size_t n = 12;
  const PathCoordinates pc(seed(n).T, n);
  const Vector v = perturbed(pc, n, 7);
  const Vector g = pc.pull_back(v, node_gradient(pc.unpack(v)));
  const double e = 1e-5;
  for (std::size_t i = 0; i < v.size(); ++i) {
    Vector a = v, b = v, c = v, d = v;
    a[i] += 2 * e, b[i] += e, c[i] -= e, d[i] -= 2 * e;
    const double fd = (-discrete_action(pc.unpack(a)) + 8 * discrete_action(pc.unpack(b)) -
                       8 * discrete_action(pc.unpack(c)) + discrete_action(pc.unpack(d))) /
                      (12 * e);
    EXPECT_NEAR(g[i], fd, 1e-7 * (1.0 + std::abs(fd))) << i;
  }
}

TEST(PathCoordinates, NodeNormAgreesWithActionGradient) {
  const std::size_t n = 24;
  const PathCoordinates pc(seed(n).T, n);
  for (unsigned s = 1; s <= 4; ++s) {
    const Vector v = perturbed(pc, n, s);
    const DiscretePath p = pc.unpack(v);
    const double a = pc.node_norm(v, pc.pull_back(v, node_gradient(p)));
    EXPECT_NEAR(a, action_gradient(p).norm(), 1e-12 * a);
  }
}

TEST(Thomas, SolvesTridiagonalSystem) {
  const std::size_t m = 9;
  const double a = 2.5, b = -1.0;
  std::vector<double> rhs(2 * m), out(2 * m), c;
  for (std::size_t i = 0; i < m; ++i) rhs[2 * i] = std::sin(1.0 + i);
  detail::thomas(a, b, m, rhs.data(), out.data(), 2, c);
  for (std::size_t i = 0; i < m; ++i) {
    double r = a * out[2 * i];
    if (i > 0) r += b * out[2 * (i - 1)];
    if (i + 1 < m) r += b * out[2 * (i + 1)];
    EXPECT_NEAR(r, rhs[2 * i], 1e-14);
  }
}

TEST(Minimize, ReachesMinimalAction) {
  const MinimizeReport& r = converged(512);
  EXPECT_TRUE(r.converged);
  EXPECT_LT(r.gradient_norm, 1e-10);
  EXPECT_NEAR(r.action, 2.0309938, 1e-3);
  const BoundsReport b = bounds_report(euler_length().ell0);
  EXPECT_LT(r.action, b.a);
  EXPECT_LT(b.a, b.A2);
}

TEST(Minimize, ZeroAngularMomentum) {
  for (std::size_t n : {128, 512}) EXPECT_LT(converged(n).max_angular_momentum, 1e-6) << n;
}

TEST(Minimize, CollisionFree) {
  const MinimizeReport& r = converged(512);
  EXPECT_GT(r.min_separation, 0.1);
  EXPECT_NEAR(r.min_separation, min_separation(r.path), 0.0);
}

TEST(Minimize, SecondOrderRefinement) {
  const double a1 = converged(128).action, a2 = converged(256).action, a3 = converged(512).action,
               a4 = converged(1024).action;
  EXPECT_LT(a1, a2);
  EXPECT_LT(a2, a3);
  EXPECT_LT(a3, a4);
  EXPECT_GE(std::log2((a2 - a1) / (a3 - a2)), 1.9);
  EXPECT_GE(std::log2((a3 - a2) / (a4 - a3)), 1.9);
  const double limit = a4 + (a4 - a3) / 3.0;
  EXPECT_NEAR(limit, 2.0309938, 1e-7);
}

TEST(Minimize, StaysInQuarterSphere) {
  const MinimizeReport& r = converged(512);
  const std::size_t n = r.path.segments();
  EXPECT_NEAR(shape_of(r.path.nodes[0]).u3, 0.0, 1e-14);
  for (std::size_t k = 1; k <= n; ++k) EXPECT_GT(shape_of(r.path.nodes[k]).u3, 0.0) << k;
  for (std::size_t k = 0; k < n; ++k) {
    const SideLengths s = side_lengths(r.path.nodes[k]);
    EXPECT_NE(s.r12, s.r31) << k;
    EXPECT_GT(s.r12, s.r31) << k;
  }
}

TEST(Minimize, EnergyConstantToSecondOrder) {
  for (std::size_t n : {128, 512}) {
    const MinimizeReport& r = converged(n);
    const std::vector<double> H = node_energies(r.path);
    const auto [lo, hi] = std::minmax_element(H.begin(), H.end());
    const double h = r.path.h();
    EXPECT_LT((*hi - *lo) / std::abs(H.front()), 5.0 * h * h) << n;
  }
}

TEST(Minimize, StrictDescentAboveNoiseFloor) {
  const MinimizeReport r = minimize(seed(256), 1e-6, 10000);
  ASSERT_TRUE(r.converged);
  ASSERT_GT(r.history.size(), 5u);
  EXPECT_LT(r.history.front(), discrete_action(seed(256)));
  for (std::size_t i = 1; i < r.history.size(); ++i) EXPECT_LT(r.history[i], r.history[i - 1]) << i;
}

TEST(Minimize, Deterministic) {
  const MinimizeReport a = minimize(seed(64), 1e-9, 10000), b = minimize(seed(64), 1e-9, 10000);
  EXPECT_EQ(a.iterations, b.iterations);
  EXPECT_EQ(a.action, b.action);
  for (std::size_t k = 0; k <= 64; ++k) EXPECT_EQ(max_abs_difference(a.path.nodes[k], b.path.nodes[k]), 0.0);
}

TEST(Minimize, IterationCapReportsUnconverged) {
  const MinimizeReport r = minimize(seed(64), 1e-12, 3);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.iterations, 3u);
  EXPECT_LT(r.action, discrete_action(seed(64)));
}

TEST(Minimize, StopsAtRoundingFloor) {
  // below the gradient's rounding floor the run gives up instead of looping
  MinimizeOptions o;
  o.tol = 1e-15;
  o.max_iter = 100000;
  const MinimizeReport r = minimize(seed(128), o);
  EXPECT_FALSE(r.converged);
  EXPECT_LT(r.iterations, 20000u);
  EXPECT_NEAR(r.action, minimize(seed(128), 1e-10, 100000).action, 1e-12);
}

TEST(Minimize, Errors) {
  EXPECT_THROW(minimize(seed(32), 0.0, 10), DomainError);
  DiscretePath p = seed(32);
  p.nodes[5][1] = p.nodes[5][2];
  EXPECT_THROW(minimize(p, 1e-9, 10), CollisionError);
}

TEST(NodeEnergies, RotatingEquilateralTriangle) {
  // Lagrange rotating equilateral triangle: H is exact for the continuous
  // orbit, so the node values only carry the O(h²) velocity error.
  const double R = 1.0, w = std::sqrt(std::sqrt(3.0) / (3.0 * R * R * R));
  const double T = 1.0;
  const std::size_t n = 200;
  DiscretePath p;
  p.T = T;
  for (std::size_t k = 0; k <= n; ++k) {
    const double t = T * k / n;
    Configuration c;
    for (int i = 0; i < 3; ++i) {
      const double a = w * t + 2.0 * kPi * i / 3.0;
      c[i] = Vec2{R * std::cos(a), R * std::sin(a)};
    }
    p.nodes.push_back(c);
  }
  const std::vector<double> H = node_energies(p);
  const double exact = 0.5 * 3.0 * w * w * R * R - 3.0 / (std::sqrt(3.0) * R);
  const double h = T / n;
  for (double e : H) EXPECT_NEAR(e, exact, 2.0 * w * w * h * h);
}
