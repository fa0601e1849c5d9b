#pragma once

// Maps from the configuration space to Jacobi coordinates and on to the
// reduced shape space R^3 (the cone over the shape sphere).

#include <array>
#include <cmath>
#include <string_view>
#include <utility>

#include "eight/configuration.hpp"
#include "eight/errors.hpp"

namespace eight {

inline constexpr double kSqrt2 = 1.414213562373095048801688724209698079;
inline constexpr double kSqrt3 = 1.732050807568877293527446341505872367;

/// Isometric coordinates (z1, z2) of C^2, each stored as a planar vector.
struct JacobiCoords {
  Vec2 z1;
  Vec2 z2;
};

constexpr double squared_norm(const JacobiCoords& j) { return norm2(j.z1) + norm2(j.z2); }

/// Point of the reduced shape space. Its Euclidean norm equals I.
struct ShapeVector {
  double u1 = 0.0;
  double u2 = 0.0;
  double u3 = 0.0;

  double norm() const { return std::sqrt(u1 * u1 + u2 * u2 + u3 * u3); }
  ShapeVector normalized() const {
    const double n = norm();
    return {u1 / n, u2 / n, u3 / n};
  }
  friend constexpr ShapeVector operator*(double s, const ShapeVector& u) {
    return {s * u.u1, s * u.u2, s * u.u3};
  }
  friend constexpr ShapeVector operator-(const ShapeVector& u) { return {-u.u1, -u.u2, -u.u3}; }
  friend constexpr bool operator==(const ShapeVector&, const ShapeVector&) = default;
};

constexpr double dot(const ShapeVector& a, const ShapeVector& b) {
  return a.u1 * b.u1 + a.u2 * b.u2 + a.u3 * b.u3;
}
constexpr ShapeVector cross(const ShapeVector& a, const ShapeVector& b) {
  return {a.u2 * b.u3 - a.u3 * b.u2, a.u3 * b.u1 - a.u1 * b.u3, a.u1 * b.u2 - a.u2 * b.u1};
}

/// (r, θ, φ) with u = r²(cosφ cosθ, cosφ sinθ, sinφ); θ ∈ [0, 2π), φ ∈ [−π/2, π/2].
struct SphericalShape {
  double r = 0.0;
  double theta = 0.0;
  double phi = 0.0;
};

inline JacobiCoords jacobi_map(const Configuration& c) {
  const double a = 1.0 / kSqrt2;
  const double b = std::sqrt(2.0 / 3.0);
  return {(c[2] - c[1]) * a, (c[0] - (c[1] + c[2]) * 0.5) * b};
}

/// Inverse of jacobi_map on the zero-sum subspace.
inline Configuration jacobi_inverse(const JacobiCoords& j) {
  const Vec2 x1 = j.z2 * std::sqrt(2.0 / 3.0);
  const Vec2 half = j.z1 * (1.0 / kSqrt2);
  return {{x1, x1 * -0.5 - half, x1 * -0.5 + half}};
}

/// Hopf map (|z1|² − |z2|², 2 z̄1 z2).
constexpr ShapeVector hopf_map(const JacobiCoords& j) {
  return {norm2(j.z1) - norm2(j.z2), 2.0 * dot(j.z1, j.z2), 2.0 * cross(j.z1, j.z2)};
}

inline ShapeVector shape_of(const Configuration& c) { return hopf_map(jacobi_map(c)); }

/// One preimage of u under the Hopf map. The larger of z1, z2 is taken real
/// and nonnegative; any other preimage differs by a common phase.
inline JacobiCoords hopf_section(const ShapeVector& u) {
  const double I = u.norm();
  JacobiCoords j;
  if (u.u1 >= 0.0) {
    const double a = std::sqrt(0.5 * (I + u.u1));
    if (a == 0.0) return j;
    j.z1 = {a, 0.0};
    j.z2 = {u.u2 / (2.0 * a), u.u3 / (2.0 * a)};
  } else {
    const double b = std::sqrt(0.5 * (I - u.u1));
    j.z2 = {b, 0.0};
    j.z1 = {u.u2 / (2.0 * b), -u.u3 / (2.0 * b)};
  }
  return j;
}

inline Configuration configuration_from_shape(const ShapeVector& u) {
  return jacobi_inverse(hopf_section(u));
}

inline SphericalShape to_spherical(const ShapeVector& u) {
  const double n = u.norm();
  double theta = std::atan2(u.u2, u.u1);
  if (theta < 0.0) theta += 2.0 * kPi;
  if (theta >= 2.0 * kPi) theta -= 2.0 * kPi;
  return {std::sqrt(n), theta, std::atan2(u.u3, std::hypot(u.u1, u.u2))};
}

inline ShapeVector from_spherical(const SphericalShape& s) {
  const double r2 = s.r * s.r;
  const double c = std::cos(s.phi);
  return {r2 * c * std::cos(s.theta), r2 * c * std::sin(s.theta), r2 * std::sin(s.phi)};
}

/// Collision points, Euler points and Lagrange points on the unit shape sphere.
struct NamedPoints {
  ShapeVector C1{-1.0, 0.0, 0.0};
  ShapeVector C2{0.5, kSqrt3 / 2.0, 0.0};
  ShapeVector C3{0.5, -kSqrt3 / 2.0, 0.0};
  ShapeVector E1{1.0, 0.0, 0.0};
  ShapeVector E2{-0.5, -kSqrt3 / 2.0, 0.0};
  ShapeVector E3{-0.5, kSqrt3 / 2.0, 0.0};
  ShapeVector L_plus{0.0, 0.0, 1.0};
  ShapeVector L_minus{0.0, 0.0, -1.0};

  std::array<std::pair<std::string_view, ShapeVector>, 8> list() const {
    return {{{"C1", C1}, {"C2", C2}, {"C3", C3}, {"E1", E1}, {"E2", E2}, {"E3", E3},
             {"L+", L_plus}, {"L-", L_minus}}};
  }
};

constexpr NamedPoints named_points() { return {}; }

/// Side lengths of the triangle with unit-sphere shape u: r_jk = √(1 − C_i·u).
/// Throws DomainError when |u| differs from 1 by more than 1e-9.
inline SideLengths shape_to_sides(const ShapeVector& u) {
  if (std::abs(u.norm() - 1.0) > 1e-9) {
    throw DomainError("shape_to_sides: shape vector must lie on the unit sphere");
  }
  const NamedPoints p = named_points();
  auto side = [&](const ShapeVector& c) { return std::sqrt(std::max(0.0, 1.0 - dot(c, u))); };
  return {side(p.C1), side(p.C2), side(p.C3)};
}

/// Deformation part of the kinetic energy: |v|² − ω(x, v)²/|x|².
inline double reduced_kinetic(const Configuration& x, const Configuration& v) {
  const double I = moment_of_inertia(x);
  if (I == 0.0) throw CollisionError("reduced_kinetic: triple collision (zero configuration)");
  const double w = omega(x, v);
  return dot(v, v) - w * w / I;
}

/// Collinear shapes sit on the equator: |u3| < eps·I.
inline bool is_collinear(const Configuration& c, double eps = 1e-10) {
  const ShapeVector u = shape_of(c);
  return std::abs(u.u3) < eps * u.norm();
}

}  // namespace eight
