#pragma once

// Closed-form action levels at period fraction T: the two-body collision
// bound A2, the triple-collision bound A3, and the best constant-size test
// path that runs along the Euler equipotential.

#include <cmath>
#include <string>

#include "eight/errors.hpp"
#include "eight/shape.hpp"

namespace eight {

inline constexpr double kTwelfth = 2.0 * kPi / 12.0;  // default T

struct BoundsReport {
  double T = 0.0;
  double A2 = 0.0;
  double A3 = 0.0;
  double I0_star = 0.0;
  double a = 0.0;
  double ell0 = 0.0;
  bool gate_passed = false;
};

namespace detail {
inline void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(std::string(what) + " must be positive and finite");
}
}  // namespace detail

/// A2 = ½·3·(2π²)^{1/3}(½Ũ2)^{2/3}(2T)^{1/3} with Ũ2 = 1/√2.
inline double collision_bound_A2(double T) {
  detail::require_positive(T, "T");
  const double U2 = 1.0 / kSqrt2;
  return 1.5 * std::cbrt(2.0 * kPi * kPi) * std::pow(0.5 * U2, 2.0 / 3.0) * std::cbrt(2.0 * T);
}

/// A3 = (3√2)^{2/3}·A2, the same bound with Ũ3 = 3.
inline double triple_collision_bound_A3(double T) {
  return std::pow(3.0 * kSqrt2, 2.0 / 3.0) * collision_bound_A2(T);
}

/// Action of the constant-size path of size √I0 run along the equipotential
/// twelfth-arc at constant speed in time T.
inline double test_action(double I0, double ell0, double T) {
  detail::require_positive(I0, "I0");
  detail::require_positive(ell0, "ell0");
  detail::require_positive(T, "T");
  const double v = ell0 * std::sqrt(I0) / T;
  return 0.5 * v * v * T + (5.0 / kSqrt2) * T / std::sqrt(I0);
}

struct OptimalTest {
  double I0_star = 0.0;
  double a = 0.0;
};

inline OptimalTest optimal_test_action(double ell0, double T) {
  detail::require_positive(ell0, "ell0");
  detail::require_positive(T, "T");
  const double U = 5.0 / kSqrt2;
  return {std::pow(U / (ell0 * ell0), 2.0 / 3.0) * std::pow(T, 4.0 / 3.0),
          1.5 * std::pow(U, 2.0 / 3.0) * std::pow(ell0, 2.0 / 3.0) * std::cbrt(T)};
}

/// Gate of the collision-exclusion argument stated on the length alone.
inline bool length_gate(double ell0) { return ell0 < kPi / 5.0; }

inline BoundsReport bounds_report(double ell0, double T = kTwelfth) {
  BoundsReport r;
  r.T = T;
  r.ell0 = ell0;
  r.A2 = collision_bound_A2(T);
  r.A3 = triple_collision_bound_A3(T);
  const OptimalTest o = optimal_test_action(ell0, T);
  r.I0_star = o.I0_star;
  r.a = o.a;
  r.gate_passed = r.a < r.A2;
  return r;
}

}  // namespace eight
