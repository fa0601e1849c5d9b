#pragma once

// Discretized paths in the configuration space and their action.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "eight/configuration.hpp"
#include "eight/errors.hpp"
#include "eight/shape.hpp"

namespace eight {

/// Uniform time grid on [0, T] with one configuration per node.
struct DiscretePath {
  double T = 0.0;
  std::vector<Configuration> nodes;

  std::size_t segments() const { return nodes.empty() ? 0 : nodes.size() - 1; }
  double h() const { return T / static_cast<double>(segments()); }
};

namespace detail {

inline void require_path(const DiscretePath& p, const char* who) {
  if (p.nodes.size() < 2) throw DomainError(std::string(who) + ": path needs at least two nodes");
  if (!(p.T > 0.0)) throw DomainError(std::string(who) + ": T must be positive");
}

/// Trapezoid weight of node k on a grid with n segments.
constexpr double trapezoid_weight(std::size_t k, std::size_t n) {
  return (k == 0 || k == n) ? 0.5 : 1.0;
}

}  // namespace detail

/// Action with forward-difference kinetic term and trapezoid potential.
/// Returns +inf when a node has a collision.
inline double discrete_action(const DiscretePath& p) {
  detail::require_path(p, "discrete_action");
  const std::size_t n = p.segments();
  const double h = p.h();
  long double kin = 0.0L, pot = 0.0L;
  for (std::size_t k = 0; k < n; ++k) {
    const Configuration d = p.nodes[k + 1] - p.nodes[k];
    kin += static_cast<long double>(dot(d, d));
  }
  for (std::size_t k = 0; k <= n; ++k) {
    const double u = potential(p.nodes[k]);
    if (std::isinf(u)) return std::numeric_limits<double>::infinity();
    pot += static_cast<long double>(detail::trapezoid_weight(k, n) * u);
  }
  return static_cast<double>(0.5L * kin / h + pot * h);
}

/// Same discretization with arbitrary masses. A pair whose mass product is
/// zero contributes nothing, even when the two bodies coincide.
inline double three_mass_action(const std::array<double, 3>& m, const DiscretePath& p) {
  detail::require_path(p, "three_mass_action");
  const std::size_t n = p.segments();
  const double h = p.h();
  long double kin = 0.0L, pot = 0.0L;
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < 3; ++i) {
      kin += static_cast<long double>(m[i] * norm2(p.nodes[k + 1][i] - p.nodes[k][i]));
    }
  }
  constexpr std::array<std::array<std::size_t, 2>, 3> pairs{{{0, 1}, {0, 2}, {1, 2}}};
  for (std::size_t k = 0; k <= n; ++k) {
    double u = 0.0;
    for (const auto& [i, j] : pairs) {
      const double mm = m[i] * m[j];
      if (mm == 0.0) continue;
      const double r = norm(p.nodes[k][i] - p.nodes[k][j]);
      if (r == 0.0) return std::numeric_limits<double>::infinity();
      u += mm / r;
    }
    pot += static_cast<long double>(detail::trapezoid_weight(k, n) * u);
  }
  return static_cast<double>(0.5L * kin / h + pot * h);
}

/// Gradient of discrete_action. `node` holds the unconstrained partials for
/// every node. `start` is the partial with respect to z where node 0 is
/// (z, −z, 0), and `end` is the node-n partial projected on the tangent space
/// of the zero-sum isosceles manifold r12 = r13. Interior entries are
/// projected on the zero-sum subspace.
struct ActionGradient {
  std::vector<Configuration> node;
  Vec2 start;
  Configuration end;

  /// Euclidean norm over the free directions (interior, start, end).
  double norm() const {
    long double s = static_cast<long double>(norm2(start)) + static_cast<long double>(dot(end, end));
    for (std::size_t k = 1; k + 1 < node.size(); ++k) s += static_cast<long double>(dot(node[k], node[k]));
    return std::sqrt(static_cast<double>(s));
  }
  /// Largest absolute component over the free directions.
  double max_abs() const {
    double m = std::max(std::abs(start.x), std::abs(start.y));
    auto scan = [&m](const Configuration& c) {
      for (const auto& b : c.body) m = std::max({m, std::abs(b.x), std::abs(b.y)});
    };
    scan(end);
    for (std::size_t k = 1; k + 1 < node.size(); ++k) scan(node[k]);
    return m;
  }
};

/// Unconstrained node partials: (2x_k − x_{k−1} − x_{k+1})/h + w_k h ∇U(x_k).
inline std::vector<Configuration> node_gradient(const DiscretePath& p) {
  detail::require_path(p, "action_gradient");
  const std::size_t n = p.segments();
  const double h = p.h();
  const auto& x = p.nodes;
  std::vector<Configuration> g(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    Configuration kin;
    if (k > 0) kin += x[k] - x[k - 1];
    if (k < n) kin += x[k] - x[k + 1];
    g[k] = kin / h + accelerations(x[k]) * (detail::trapezoid_weight(k, n) * h);
  }
  return g;
}

/// Projection of a node-n covector on the tangent space of {Σx = 0, r12 = r13}.
/// In Jacobi coordinates the constraint reads z1·z2 = 0.
inline Configuration isosceles_tangent(const Configuration& x, const Configuration& g) {
  const JacobiCoords z = jacobi_map(x);
  const JacobiCoords gz = jacobi_map(centered(g));
  // jacobi_map on zero-sum vectors is an isometry onto C²; normal is (z2, z1).
  const double nn = norm2(z.z1) + norm2(z.z2);
  const double gn = dot(gz.z1, z.z2) + dot(gz.z2, z.z1);
  JacobiCoords t = gz;
  if (nn > 0.0) {
    t.z1 -= z.z2 * (gn / nn);
    t.z2 -= z.z1 * (gn / nn);
  }
  return jacobi_inverse(t);
}

inline ActionGradient action_gradient(const DiscretePath& p) {
  ActionGradient r;
  r.node = node_gradient(p);
  const std::size_t n = p.segments();
  r.start = r.node[0][0] - r.node[0][1];
  r.end = isosceles_tangent(p.nodes[n], r.node[n]);
  for (std::size_t k = 1; k < n; ++k) r.node[k] = centered(r.node[k]);
  return r;
}

/// Smallest mutual distance over all nodes.
inline double min_separation(const DiscretePath& p) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& c : p.nodes) m = std::min(m, side_lengths(c).min());
  return m;
}

/// max_k |ω(x_k, (x_{k+1} − x_k)/h)|.
inline double max_step_angular_momentum(const DiscretePath& p) {
  double m = 0.0;
  const double h = p.h();
  for (std::size_t k = 0; k + 1 < p.nodes.size(); ++k) {
    m = std::max(m, std::abs(omega(p.nodes[k], (p.nodes[k + 1] - p.nodes[k]) / h)));
  }
  return m;
}

/// Node 0 on the E3 manifold (z, −z, 0).
inline bool starts_on_e3(const DiscretePath& p, double tol = 1e-10) {
  const Configuration& c = p.nodes.front();
  return norm(c[0] + c[1]) <= tol && norm(c[2]) <= tol;
}

/// Node n on the isosceles manifold r12 = r13.
inline bool ends_on_m1(const DiscretePath& p, double tol = 1e-10) {
  const SideLengths s = side_lengths(p.nodes.back());
  return std::abs(s.r12 - s.r31) <= tol;
}

}  // namespace eight
