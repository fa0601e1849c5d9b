#pragma once

// Direct minimization of the discrete action over paths from the E3
// manifold {(z, −z, 0)} to the isosceles manifold {r12 = r13}.
//
// Unknowns: z for node 0; Jacobi coordinates (z1, z2) of every interior node;
// (p, q, β) for node n with z1 = p e^{iβ}, z2 = q i e^{iβ}, which is the
// isosceles condition z1 ⟂ z2 built in.

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "eight/configuration.hpp"
#include "eight/errors.hpp"
#include "eight/lbfgs.hpp"
#include "eight/path.hpp"
#include "eight/shape.hpp"

namespace eight {

struct MinimizeOptions {
  double tol = 1e-9;  ///< on the node-space gradient norm (ActionGradient::norm)
  std::size_t max_iter = 50000;
  std::size_t memory = 20;
  double collision_floor = 1e-6;
  std::size_t stall_iter = 1000;  ///< iterations without progress before giving up
};

struct MinimizeReport {
  DiscretePath path;
  double action = 0.0;
  double gradient_norm = 0.0;
  double min_separation = 0.0;
  double max_angular_momentum = 0.0;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  bool converged = false;
  std::vector<double> history;  ///< action after each accepted step
};

/// Packing of a constrained path into a flat parameter vector.
class PathCoordinates {
 public:
  PathCoordinates(double T, std::size_t n) : T_(T), n_(n) {
    if (!(T > 0.0)) throw DomainError("minimize: T must be positive");
    if (n < 2) throw DomainError("minimize: need at least 2 segments");
  }

  std::size_t segments() const { return n_; }
  std::size_t size() const { return 2 + 4 * (n_ - 1) + 3; }

  Vector pack(const DiscretePath& p) const {
    if (p.segments() != n_) throw DomainError("minimize: segment count mismatch");
    if (!starts_on_e3(p)) throw DomainError("minimize: node 0 is not an E3 configuration (z, -z, 0)");
    if (!ends_on_m1(p)) throw DomainError("minimize: node n does not satisfy r12 = r13");
    Vector v(size());
    v[0] = p.nodes[0][0].x;
    v[1] = p.nodes[0][0].y;
    for (std::size_t k = 1; k < n_; ++k) {
      const JacobiCoords j = jacobi_map(centered(p.nodes[k]));
      double* o = &v[2 + 4 * (k - 1)];
      o[0] = j.z1.x, o[1] = j.z1.y, o[2] = j.z2.x, o[3] = j.z2.y;
    }
    const JacobiCoords j = jacobi_map(centered(p.nodes[n_]));
    const double beta = norm2(j.z1) >= norm2(j.z2) ? std::atan2(j.z1.y, j.z1.x)
                                                   : std::atan2(-j.z2.x, j.z2.y);
    const Vec2 e{std::cos(beta), std::sin(beta)};
    v[size() - 3] = dot(j.z1, e);
    v[size() - 2] = dot(j.z2, perp(e));
    v[size() - 1] = beta;
    return v;
  }

  DiscretePath unpack(const Vector& v) const {
    DiscretePath p;
    p.T = T_;
    p.nodes.resize(n_ + 1);
    const Vec2 z{v[0], v[1]};
    p.nodes[0] = {{z, -z, Vec2{}}};
    for (std::size_t k = 1; k < n_; ++k) {
      const double* o = &v[2 + 4 * (k - 1)];
      p.nodes[k] = jacobi_inverse({{o[0], o[1]}, {o[2], o[3]}});
    }
    p.nodes[n_] = end_node(v);
    return p;
  }

  /// Chain rule from node-space partials to parameter partials.
  Vector pull_back(const Vector& v, const std::vector<Configuration>& g) const {
    Vector out(size());
    const Vec2 gz = g[0][0] - g[0][1];
    out[0] = gz.x;
    out[1] = gz.y;
    for (std::size_t k = 1; k < n_; ++k) {
      const JacobiCoords j = jacobi_map(centered(g[k]));
      double* o = &out[2 + 4 * (k - 1)];
      o[0] = j.z1.x, o[1] = j.z1.y, o[2] = j.z2.x, o[3] = j.z2.y;
    }
    const auto [P, Q, e] = end_frame(v);
    const JacobiCoords j = jacobi_map(centered(g[n_]));
    const Vec2 ie = perp(e);
    out[size() - 3] = dot(j.z1, e);
    out[size() - 2] = dot(j.z2, ie);
    out[size() - 1] = dot(j.z1, ie * P) + dot(j.z2, e * -Q);
    return out;
  }

  /// Node-space norm of a parameter gradient: the β partial is divided by the
  /// length √(p² + q²) of its tangent vector, all other directions are unit.
  double node_norm(const Vector& v, const Vector& g) const {
    long double s = 0.0L;
    for (std::size_t i = 0; i + 1 < g.size(); ++i) s += static_cast<long double>(g[i]) * g[i];
    const auto [P, Q, e] = end_frame(v);
    const double I = P * P + Q * Q;
    const double gb = g.back();
    if (I > 0.0) s += static_cast<long double>(gb * gb / I);
    return std::sqrt(static_cast<double>(s));
  }

 private:
  struct Frame {
    double P, Q;
    Vec2 e;
  };
  Frame end_frame(const Vector& v) const {
    const double beta = v[size() - 1];
    return {v[size() - 3], v[size() - 2], Vec2{std::cos(beta), std::sin(beta)}};
  }
  Configuration end_node(const Vector& v) const {
    const auto [P, Q, e] = end_frame(v);
    return jacobi_inverse({e * P, perp(e) * Q});
  }

  double T_;
  std::size_t n_;
};

namespace detail {

/// Solves the constant-coefficient tridiagonal system (diag a, off-diagonal b)
/// by the Thomas algorithm, reading and writing with a stride.
inline void thomas(double a, double b, std::size_t m, const double* rhs, double* out, std::size_t stride,
                   std::vector<double>& c) {
  c.resize(m);
  double denom = a;
  c[0] = b / denom;
  out[0] = rhs[0] / denom;
  for (std::size_t i = 1; i < m; ++i) {
    denom = a - b * c[i - 1];
    c[i] = b / denom;
    out[i * stride] = (rhs[i * stride] - b * out[(i - 1) * stride]) / denom;
  }
  for (std::size_t i = m - 1; i-- > 0;) out[i * stride] -= c[i] * out[(i + 1) * stride];
}

/// Mean over nodes of Σ_pairs 2/r³: a scale for the potential Hessian.
inline double potential_curvature(const DiscretePath& p) {
  long double s = 0.0L;
  for (const auto& c : p.nodes) {
    const SideLengths r = side_lengths(c);
    s += 2.0L / (static_cast<long double>(r.r12) * r.r12 * r.r12) +
         2.0L / (static_cast<long double>(r.r31) * r.r31 * r.r31) +
         2.0L / (static_cast<long double>(r.r23) * r.r23 * r.r23);
  }
  return static_cast<double>(s / p.nodes.size());
}

}  // namespace detail

/// Minimizes discrete_action with the endpoint constraints built into the
/// unknowns. Throws CollisionError if an accepted iterate comes closer than
/// opt.collision_floor, ConvergenceError if the line search breaks down.
inline MinimizeReport minimize(const DiscretePath& initial, const MinimizeOptions& opt = {}) {
  if (!(opt.tol > 0.0)) throw DomainError("minimize: tol must be positive");
  const PathCoordinates pc(initial.T, initial.segments());
  if (min_separation(initial) <= opt.collision_floor) {
    throw CollisionError("minimize: initial path has a collision");
  }
  const std::size_t n = pc.segments();
  const double h = initial.h();

  // Preconditioner: kinetic Hessian (tridiagonal per coordinate stream with
  // Dirichlet ends) plus a diagonal potential shift.
  const double kappa = detail::potential_curvature(initial);
  const double diag = 2.0 / h + h * kappa;
  const double off = -1.0 / h;
  const Vector v0 = pc.pack(initial);
  const double I_end = v0[pc.size() - 3] * v0[pc.size() - 3] + v0[pc.size() - 2] * v0[pc.size() - 2];
  const double m_z = 4.0 / h + h * kappa;
  const double m_pq = 1.0 / h + 0.5 * h * kappa;
  const double m_beta = I_end * m_pq;
  Preconditioner precondition = [&, scratch = std::vector<double>()](const Vector& g, Vector& out) mutable {
    out.resize(g.size());
    out[0] = g[0] / m_z;
    out[1] = g[1] / m_z;
    if (n > 1) {
      for (std::size_t s = 0; s < 4; ++s) {
        detail::thomas(diag, off, n - 1, &g[2 + s], &out[2 + s], 4, scratch);
      }
    }
    const std::size_t e = pc.size() - 3;
    out[e] = g[e] / m_pq;
    out[e + 1] = g[e + 1] / m_pq;
    out[e + 2] = g[e + 2] / m_beta;
  };

  Objective objective = [&](const Vector& v, Vector& g) {
    const DiscretePath p = pc.unpack(v);
    const double a = discrete_action(p);
    if (!std::isfinite(a)) return a;
    g = pc.pull_back(v, node_gradient(p));
    return a;
  };
  GradientNorm measure = [&](const Vector& v, const Vector& g) { return pc.node_norm(v, g); };
  StepHook hook = [&](const Vector& v) {
    const double sep = min_separation(pc.unpack(v));
    if (sep < opt.collision_floor) {
      throw CollisionError("minimize: separation " + std::to_string(sep) + " below the collision floor");
    }
  };

  LbfgsOptions lo;
  lo.tol = opt.tol;
  lo.max_iter = opt.max_iter;
  lo.memory = opt.memory;
  lo.stall_iter = opt.stall_iter;
  const LbfgsResult r = lbfgs_minimize(objective, v0, lo, precondition, measure, hook);

  MinimizeReport rep;
  rep.path = pc.unpack(r.x);
  rep.action = discrete_action(rep.path);
  rep.gradient_norm = action_gradient(rep.path).norm();
  rep.min_separation = min_separation(rep.path);
  rep.max_angular_momentum = max_step_angular_momentum(rep.path);
  rep.iterations = r.iterations;
  rep.evaluations = r.evaluations;
  rep.converged = rep.gradient_norm < opt.tol;
  rep.history = r.history;
  return rep;
}

inline MinimizeReport minimize(const DiscretePath& initial, double tol, std::size_t max_iter) {
  MinimizeOptions o;
  o.tol = tol;
  o.max_iter = max_iter;
  return minimize(initial, o);
}

/// Energy ½|v_k|² − U(x_k) at every node. Interior velocities are central
/// differences; at the two ends the discrete Legendre transform
/// v₀ = Δ₀/h − (h/2)a(x₀), v_n = Δ_{n−1}/h + (h/2)a(x_n) is used.
/// Node velocities: central differences inside, discrete Legendre transform
/// at the two ends (the Störmer–Verlet velocities of a stationary path).
inline std::vector<Configuration> node_velocities(const DiscretePath& p) {
  detail::require_path(p, "node_velocities");
  const std::size_t n = p.segments();
  const double h = p.h();
  const auto& x = p.nodes;
  std::vector<Configuration> v(n + 1);
  v[0] = (x[1] - x[0]) / h - accelerations(x[0]) * (0.5 * h);
  v[n] = (x[n] - x[n - 1]) / h + accelerations(x[n]) * (0.5 * h);
  for (std::size_t k = 1; k < n; ++k) v[k] = (x[k + 1] - x[k - 1]) / (2.0 * h);
  return v;
}

inline std::vector<double> node_energies(const DiscretePath& p) {
  const std::vector<Configuration> v = node_velocities(p);
  std::vector<double> H(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) H[k] = 0.5 * dot(v[k], v[k]) - potential(p.nodes[k]);
  return H;
}

}  // namespace eight
