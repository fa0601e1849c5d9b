#pragma once

// Planar three-body configurations with unit masses and the phase-space
// functions built on the mass scalar product.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>

#include "eight/errors.hpp"

namespace eight {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
  constexpr Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
  constexpr Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
  friend constexpr Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
  friend constexpr Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
  friend constexpr Vec2 operator*(Vec2 a, double s) { return a *= s; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return a *= s; }
  friend constexpr Vec2 operator/(Vec2 a, double s) { return a *= (1.0 / s); }
  friend constexpr Vec2 operator-(const Vec2& a) { return {-a.x, -a.y}; }
  friend constexpr bool operator==(const Vec2&, const Vec2&) = default;
};

constexpr double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
/// a ∧ b as a multiple of e1 ∧ e2.
constexpr double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& a) { return std::hypot(a.x, a.y); }
constexpr double norm2(const Vec2& a) { return dot(a, a); }
/// Multiplication by i: rotation by +90 degrees.
constexpr Vec2 perp(const Vec2& a) { return {-a.y, a.x}; }
inline Vec2 rotated(const Vec2& a, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * a.x - s * a.y, s * a.x + c * a.y};
}

/// Positions (or velocities) of the three bodies. Points of the
/// configuration space satisfy x1 + x2 + x3 = 0.
struct Configuration {
  std::array<Vec2, 3> body{};

  constexpr Vec2& operator[](std::size_t i) { return body[i]; }
  constexpr const Vec2& operator[](std::size_t i) const { return body[i]; }

  constexpr Configuration& operator+=(const Configuration& o) {
    for (std::size_t i = 0; i < 3; ++i) body[i] += o.body[i];
    return *this;
  }
  constexpr Configuration& operator-=(const Configuration& o) {
    for (std::size_t i = 0; i < 3; ++i) body[i] -= o.body[i];
    return *this;
  }
  constexpr Configuration& operator*=(double s) {
    for (auto& b : body) b *= s;
    return *this;
  }
  friend constexpr Configuration operator+(Configuration a, const Configuration& b) { return a += b; }
  friend constexpr Configuration operator-(Configuration a, const Configuration& b) { return a -= b; }
  friend constexpr Configuration operator*(Configuration a, double s) { return a *= s; }
  friend constexpr Configuration operator*(double s, Configuration a) { return a *= s; }
  friend constexpr Configuration operator/(Configuration a, double s) { return a *= (1.0 / s); }
  friend constexpr bool operator==(const Configuration&, const Configuration&) = default;
};

/// Mass scalar product x·y (real part of the Hermitian product).
constexpr double dot(const Configuration& a, const Configuration& b) {
  return dot(a[0], b[0]) + dot(a[1], b[1]) + dot(a[2], b[2]);
}

/// Mass symplectic form ω(x, y) (imaginary part of the Hermitian product).
constexpr double omega(const Configuration& a, const Configuration& b) {
  return cross(a[0], b[0]) + cross(a[1], b[1]) + cross(a[2], b[2]);
}

constexpr double moment_of_inertia(const Configuration& c) { return dot(c, c); }

inline double size(const Configuration& c) { return std::sqrt(moment_of_inertia(c)); }

constexpr Vec2 center_sum(const Configuration& c) { return c[0] + c[1] + c[2]; }

inline bool has_zero_sum(const Configuration& c, double tol = 1e-12) {
  return norm(center_sum(c)) <= tol;
}

/// Subtracts the center of mass.
constexpr Configuration centered(Configuration c) {
  const Vec2 m = center_sum(c) / 3.0;
  for (auto& b : c.body) b -= m;
  return c;
}

inline Configuration rotated(const Configuration& c, double angle) {
  Configuration r;
  for (std::size_t i = 0; i < 3; ++i) r[i] = rotated(c[i], angle);
  return r;
}

/// Multiplication by i on every body.
constexpr Configuration perp(const Configuration& c) {
  return {{perp(c[0]), perp(c[1]), perp(c[2])}};
}

/// Mutual distances in the order (r23, r31, r12).
struct SideLengths {
  double r23 = 0.0;
  double r31 = 0.0;
  double r12 = 0.0;

  double min() const { return std::min(r23, std::min(r31, r12)); }
};

inline SideLengths side_lengths(const Configuration& c) {
  return {norm(c[1] - c[2]), norm(c[2] - c[0]), norm(c[0] - c[1])};
}

/// Force function U = 1/r12 + 1/r13 + 1/r23. Returns +inf at a collision.
inline double potential(const Configuration& c) {
  const SideLengths s = side_lengths(c);
  if (s.r23 == 0.0 || s.r31 == 0.0 || s.r12 == 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / s.r23 + 1.0 / s.r31 + 1.0 / s.r12;
}

/// √I·U, invariant under scaling.
inline double scaled_potential(const Configuration& c) { return size(c) * potential(c); }

/// Signed area of the triangle (x1, x2, x3), positive when counterclockwise.
constexpr double signed_area(const Configuration& c) {
  return 0.5 * cross(c[1] - c[0], c[2] - c[0]);
}

/// Phase-space point: configuration and velocity.
struct State {
  Configuration q;
  Configuration v;
  friend constexpr bool operator==(const State&, const State&) = default;
};

/// The O(2)-invariant functions of a phase-space point.
struct Invariants {
  double I = 0.0;  ///< moment of inertia x·x
  double J = 0.0;  ///< x·y, half of dI/dt
  double K = 0.0;  ///< y·y, twice the kinetic energy
  double U = 0.0;  ///< force function
  double H = 0.0;  ///< K/2 − U
  double C = 0.0;  ///< angular momentum ω(x, y)
};

inline Invariants invariants(const State& s) {
  Invariants r;
  r.I = moment_of_inertia(s.q);
  r.J = dot(s.q, s.v);
  r.K = dot(s.v, s.v);
  r.U = potential(s.q);
  r.H = 0.5 * r.K - r.U;
  r.C = omega(s.q, s.v);
  return r;
}

inline double energy(const State& s) { return 0.5 * dot(s.v, s.v) - potential(s.q); }
constexpr double angular_momentum(const State& s) { return omega(s.q, s.v); }

inline double max_abs_difference(const Configuration& a, const Configuration& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < 3; ++i) m = std::max({m, std::abs(a[i].x - b[i].x), std::abs(a[i].y - b[i].y)});
  return m;
}

/// Max-norm distance over all 12 phase coordinates.
inline double max_abs_difference(const State& a, const State& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    m = std::max({m, std::abs(a.q[i].x - b.q[i].x), std::abs(a.q[i].y - b.q[i].y),
                  std::abs(a.v[i].x - b.v[i].x), std::abs(a.v[i].y - b.v[i].y)});
  }
  return m;
}

/// Newtonian accelerations a_i = Σ_{j≠i} (x_j − x_i)/r_ij³, which is also ∇U.
inline Configuration accelerations(const Configuration& c) {
  Configuration a;
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = i + 1; j < 3; ++j) {
      const Vec2 d = c[j] - c[i];
      const double r2 = norm2(d);
      if (r2 == 0.0) throw CollisionError("accelerations: coincident bodies");
      const double inv = 1.0 / (r2 * std::sqrt(r2));
      a[i] += d * inv;
      a[j] -= d * inv;
    }
  }
  return a;
}

}  // namespace eight
