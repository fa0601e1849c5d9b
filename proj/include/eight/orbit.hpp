#pragma once

// Assembly of the full periodic orbit from one minimizing twelfth-arc, the
// choreography curve q, and the area rule on the shape sphere.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "eight/configuration.hpp"
#include "eight/errors.hpp"
#include "eight/path.hpp"
#include "eight/shape.hpp"
#include "eight/spline.hpp"

namespace eight {

/// Isometry of the plane combined with a relabeling of the bodies and an
/// optional reversal of time: op(c)_i = L·c_{perm[i]}, velocities also flip
/// sign under time reversal.
struct SymmetryOp {
  std::array<double, 4> L{1.0, 0.0, 0.0, 1.0};  // row-major 2×2, orthogonal
  std::array<std::size_t, 3> perm{0, 1, 2};
  bool reverses_time = false;

  Vec2 map(const Vec2& a) const { return {L[0] * a.x + L[1] * a.y, L[2] * a.x + L[3] * a.y}; }

  Configuration operator()(const Configuration& c) const {
    Configuration r;
    for (std::size_t i = 0; i < 3; ++i) r[i] = map(c[perm[i]]);
    return r;
  }
  State operator()(const State& s) const {
    State r{(*this)(s.q), (*this)(s.v)};
    if (reverses_time) r.v *= -1.0;
    return r;
  }

  /// (a ∘ b)(c) = a(b(c)).
  friend SymmetryOp compose(const SymmetryOp& a, const SymmetryOp& b) {
    SymmetryOp r;
    r.L = {a.L[0] * b.L[0] + a.L[1] * b.L[2], a.L[0] * b.L[1] + a.L[1] * b.L[3],
           a.L[2] * b.L[0] + a.L[3] * b.L[2], a.L[2] * b.L[1] + a.L[3] * b.L[3]};
    for (std::size_t i = 0; i < 3; ++i) r.perm[i] = b.perm[a.perm[i]];
    r.reverses_time = a.reverses_time != b.reverses_time;
    return r;
  }

  static SymmetryOp identity() { return {}; }
  /// (x, y) ↦ (x, −y)
  static SymmetryOp plane_reflect() { return {{1.0, 0.0, 0.0, -1.0}, {0, 1, 2}, false}; }
  /// (x, y) ↦ (−x, −y)
  static SymmetryOp plane_half_turn() { return {{-1.0, 0.0, 0.0, -1.0}, {0, 1, 2}, false}; }
  static SymmetryOp time_reverse() { return {{1.0, 0.0, 0.0, 1.0}, {0, 1, 2}, true}; }
  /// result_i = c_{p[i]}
  static SymmetryOp permute(std::array<std::size_t, 3> p) { return {{1.0, 0.0, 0.0, 1.0}, p, false}; }
  /// Interchange of the two bodies other than i (1-based).
  static SymmetryOp swap_others(int i) {
    if (i < 1 || i > 3) throw DomainError("SymmetryOp: body index must be 1, 2 or 3");
    std::array<std::size_t, 3> p{0, 1, 2};
    const std::size_t j = i % 3, k = (i + 1) % 3;
    std::swap(p[j], p[k]);
    return permute(p);
  }
  /// Reflection about meridian M_i when the axis of the isosceles triangle
  /// is the x-axis: swap of the other two bodies, then y ↦ −y.
  static SymmetryOp reflect_meridian(int i) { return compose(plane_reflect(), swap_others(i)); }
  /// Half twist through E_i: swap of the other two bodies, then (x, y) ↦ (−x, −y).
  static SymmetryOp half_twist(int i) { return compose(plane_half_turn(), swap_others(i)); }
  /// (x1, x2, x3) ↦ (x3, x1, x2)
  static SymmetryOp cycle() { return permute({2, 0, 1}); }
};

struct Orbit {
  double Tbar = 0.0;
  std::size_t arc_segments = 0;        ///< n of the source arc; nodes.size() = 12n
  std::vector<Configuration> nodes;    ///< assembled loop at t_k = k·Tbar/(12n)
  std::vector<Vec2> q;                 ///< m uniform samples of the choreography curve
  std::vector<Configuration> x;        ///< m uniform samples of (q(t+2T̄/3), q(t+T̄/3), q(t))
  std::vector<double> junction_mismatch;  ///< velocity jump at t = kT, k = 0..11

  double T() const { return Tbar / 12.0; }
  double node_step() const { return Tbar / static_cast<double>(nodes.size()); }

  /// Interpolated configuration and velocity (periodic cubic spline on nodes).
  State state_at(double t) const {
    ensure_splines();
    State s;
    for (std::size_t i = 0; i < 3; ++i) {
      s.q[i] = {spl_[2 * i](t), spl_[2 * i + 1](t)};
      s.v[i] = {spl_[2 * i].derivative(t), spl_[2 * i + 1].derivative(t)};
    }
    return s;
  }
  Configuration at(double t) const { return state_at(t).q; }
  Vec2 q_at(double t) const { return at(t)[2]; }

  /// Central-difference velocity at node k (periodic).
  Configuration node_velocity(std::size_t k) const {
    const std::size_t N = nodes.size();
    return (nodes[(k + 1) % N] - nodes[(k + N - 1) % N]) / (2.0 * node_step());
  }

 private:
  void ensure_splines() const {
    if (spl_.size() == 6) return;
    spl_.clear();
    for (std::size_t c = 0; c < 6; ++c) {
      std::vector<double> y(nodes.size());
      for (std::size_t k = 0; k < nodes.size(); ++k) {
        y[k] = (c % 2 == 0) ? nodes[k][c / 2].x : nodes[k][c / 2].y;
      }
      spl_.emplace_back(std::move(y), Tbar);
    }
  }
  mutable std::vector<PeriodicSpline> spl_;
};

class AssemblyError : public Error {
 public:
  AssemblyError(const std::string& what, double mismatch) : Error(what), mismatch_(mismatch) {}
  double mismatch() const { return mismatch_; }

 private:
  double mismatch_;
};

struct BuildOptions {
  std::size_t samples = 0;  ///< m; 0 means one sample per node
  /// Junction velocity jumps must stay below junction_constant·h².
  double junction_constant = 10.0;
};

namespace detail {

/// One-sided second-order velocities on both sides of node j; max-norm of
/// their difference.
inline double velocity_jump(const std::vector<Configuration>& X, std::size_t j, double h) {
  const std::size_t N = X.size();
  auto at = [&](std::ptrdiff_t k) -> const Configuration& {
    return X[static_cast<std::size_t>((k % static_cast<std::ptrdiff_t>(N) + N) % N)];
  };
  const auto J = static_cast<std::ptrdiff_t>(j);
  const Configuration left = (at(J) * 3.0 - at(J - 1) * 4.0 + at(J - 2)) / (2.0 * h);
  const Configuration right = (at(J + 1) * 4.0 - at(J) * 3.0 - at(J + 2)) / (2.0 * h);
  return max_abs_difference(left, right);
}

}  // namespace detail

/// Builds the 12T-periodic loop from an arc on [0, T] that starts on E3 and
/// ends on M1:
///   [T, 2T]    x(T + t)  = s1(x(T − t))
///   [2T, 4T]   x(2T + t) = H2(x(2T − t))
///   [4T, 12T]  x(t + 4T) = (x3, x1, x2)(t)
/// after rotating the arc so that body 1 at t = T lies on the positive x-axis.
inline Orbit build_orbit(const DiscretePath& arc, const BuildOptions& opt = {}) {
  detail::require_path(arc, "build_orbit");
  if (!starts_on_e3(arc)) throw DomainError("build_orbit: arc does not start on E3");
  if (!ends_on_m1(arc)) throw DomainError("build_orbit: arc does not end on M1");
  const std::size_t n = arc.segments();
  if (n < 2) throw DomainError("build_orbit: need at least 2 segments");
  const Vec2 apex = arc.nodes[n][0];
  if (norm(apex) < 1e-12) throw DomainError("build_orbit: degenerate M1 endpoint");
  const double angle = -std::atan2(apex.y, apex.x);

  const std::size_t N = 12 * n;
  std::vector<Configuration> X(N);
  for (std::size_t k = 0; k <= n; ++k) X[k] = rotated(arc.nodes[k], angle);
  // the rotated apex has y = 0 up to rounding; make the fixed point exact
  X[n][0].y = 0.0;
  {
    const Vec2 mid = (X[n][1] + X[n][2]) * 0.5;
    const Vec2 d = (X[n][1] - X[n][2]) * 0.5;
    X[n][1] = Vec2{mid.x, d.y};
    X[n][2] = Vec2{mid.x, -d.y};
  }
  const SymmetryOp s1 = SymmetryOp::reflect_meridian(1);
  const SymmetryOp H2 = SymmetryOp::half_twist(2);
  const SymmetryOp P = SymmetryOp::cycle();
  for (std::size_t j = 1; j <= n; ++j) X[n + j] = s1(X[n - j]);
  for (std::size_t j = 1; j <= 2 * n; ++j) X[2 * n + j] = H2(X[2 * n - j]);
  for (std::size_t k = 4 * n + 1; k < N; ++k) X[k] = P(X[k - 4 * n]);

  Orbit o;
  o.Tbar = 12.0 * arc.T;
  o.arc_segments = n;
  o.nodes = std::move(X);
  const double h = o.node_step();
  double worst = 0.0;
  for (std::size_t j = 0; j < 12; ++j) {
    o.junction_mismatch.push_back(detail::velocity_jump(o.nodes, j * n, h));
    worst = std::max(worst, o.junction_mismatch.back());
  }
  if (worst > opt.junction_constant * h * h) {
    throw AssemblyError("build_orbit: junction velocity jump " + std::to_string(worst) +
                            " exceeds tolerance (arc not orthogonal to its end manifolds?)",
                        worst);
  }

  // q by the piecewise rule on the node grid
  std::vector<Vec2> qn(N);
  for (std::size_t k = 0; k < N; ++k) {
    if (k < 4 * n) qn[k] = o.nodes[k][2];
    else if (k < 8 * n) qn[k] = o.nodes[k - 4 * n][1];
    else qn[k] = o.nodes[k - 8 * n][0];
  }
  const std::size_t m = opt.samples == 0 ? N : opt.samples;
  o.q.resize(m);
  if (m == N) {
    o.q = qn;
  } else {
    std::vector<double> qx(N), qy(N);
    for (std::size_t k = 0; k < N; ++k) qx[k] = qn[k].x, qy[k] = qn[k].y;
    const PeriodicSpline sx(std::move(qx), o.Tbar), sy(std::move(qy), o.Tbar);
    for (std::size_t j = 0; j < m; ++j) {
      const double t = o.Tbar * static_cast<double>(j) / static_cast<double>(m);
      o.q[j] = {sx(t), sy(t)};
    }
  }
  // x(t) = (q(t + 2T̄/3), q(t + T̄/3), q(t)); exact index shifts when 3 | m
  o.x.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    if (m % 3 == 0) {
      o.x[j] = {{o.q[(j + 2 * m / 3) % m], o.q[(j + m / 3) % m], o.q[j]}};
    } else {
      const double t = o.Tbar * static_cast<double>(j) / static_cast<double>(m);
      o.x[j] = {{o.q_at(t + 2.0 * o.Tbar / 3.0), o.q_at(t + o.Tbar / 3.0), o.q_at(t)}};
    }
  }
  return o;
}

/// Largest |x(t) − (q(t + 2T̄/3), q(t + T̄/3), q(t))| over the node grid, with
/// q the third body of the assembled loop.
inline double choreography_residual(const Orbit& o) {
  const std::size_t N = o.nodes.size();
  if (N % 3 != 0) throw DomainError("choreography_residual: node count must be divisible by 3");
  double r = 0.0;
  for (std::size_t k = 0; k < N; ++k) {
    const Configuration c{{o.nodes[(k + 2 * N / 3) % N][2], o.nodes[(k + N / 3) % N][2], o.nodes[k][2]}};
    r = std::max(r, max_abs_difference(o.nodes[k], c));
  }
  return r;
}

/// Same residual at m uniform times through the spline (off the node grid).
inline double choreography_residual(const Orbit& o, std::size_t m) {
  if (m == 0) return choreography_residual(o);
  double r = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const double t = o.Tbar * (static_cast<double>(j) + 0.5) / static_cast<double>(m);
    const Configuration c{{o.q_at(t + 2.0 * o.Tbar / 3.0), o.q_at(t + o.Tbar / 3.0), o.q_at(t)}};
    r = std::max(r, max_abs_difference(o.at(t), c));
  }
  return r;
}

/// Largest violation of q(t + T̄/2) = σq(t) and q(T̄/2 − t) = τq(t), with
/// σ: x ↦ −x and τ: y ↦ −y. Node grid when m = 0, else m spline times.
inline double klein_residual(const Orbit& o, std::size_t m = 0) {
  double r = 0.0;
  auto check = [&r](const Vec2& q, const Vec2& qs, const Vec2& qt) {
    r = std::max({r, norm(qs - Vec2{-q.x, q.y}), norm(qt - Vec2{q.x, -q.y})});
  };
  if (m == 0) {
    const std::size_t N = o.nodes.size();
    if (N % 2 != 0) throw DomainError("klein_residual: node count must be even");
    for (std::size_t k = 0; k < N; ++k)
      check(o.nodes[k][2], o.nodes[(k + N / 2) % N][2], o.nodes[(N / 2 + N - k) % N][2]);
    return r;
  }
  for (std::size_t j = 0; j < m; ++j) {
    const double t = o.Tbar * (static_cast<double>(j) + 0.5) / static_cast<double>(m);
    check(o.q_at(t), o.q_at(t + 0.5 * o.Tbar), o.q_at(0.5 * o.Tbar - t));
  }
  return r;
}

/// Signed area on the sphere of radius 1/2 enclosed by a closed loop of unit
/// vectors (last point joins the first). Fan of spherical triangles from the
/// pole whose antipode is farther from the loop; defined modulo π.
inline double spherical_area(const std::vector<ShapeVector>& loop) {
  std::vector<ShapeVector> p;
  p.reserve(loop.size());
  for (const ShapeVector& u : loop) {
    const double r = u.norm();
    if (!(r > 0.0)) continue;
    const ShapeVector v = u.normalized();
    if (!p.empty() && v == p.back()) continue;
    p.push_back(v);
  }
  while (p.size() > 1 && p.back() == p.front()) p.pop_back();
  if (p.size() < 3) return 0.0;
  double lo = 1.0, hi = -1.0;
  for (const ShapeVector& v : p) lo = std::min(lo, v.u3), hi = std::max(hi, v.u3);
  // the base must stay away from the antipodes of the loop points
  const ShapeVector base{0.0, 0.0, (lo + 1.0) >= (1.0 - hi) ? 1.0 : -1.0};
  long double total = 0.0L;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const ShapeVector& b = p[i];
    const ShapeVector& c = p[(i + 1) % p.size()];
    const double det = dot(base, cross(b, c));
    const double den = 1.0 + dot(base, b) + dot(b, c) + dot(c, base);
    total += 2.0 * std::atan2(det, den);
  }
  return static_cast<double>(total) / 4.0;
}

/// Direction of the line through a collinear configuration.
inline Vec2 euler_line(const Configuration& c, double tol = 1e-6) {
  const double I = moment_of_inertia(c);
  if (!(I > 0.0)) throw DomainError("euler_line: total collision");
  if (std::abs(signed_area(c)) > tol * I) throw DomainError("euler_line: configuration is not collinear");
  std::size_t a = 0, b = 1;
  double best = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = i + 1; j < 3; ++j) {
      const double d = norm2(c[j] - c[i]);
      if (d > best) best = d, a = i, b = j;
    }
  }
  const Vec2 d = c[b] - c[a];
  return d / norm(d);
}

/// Angle in (−π/2, π/2] from the Euler line at t0 to the Euler line at t1.
inline double euler_line_angle(const Orbit& o, double t0, double t1) {
  const Vec2 a = euler_line(o.at(t0)), b = euler_line(o.at(t1));
  double ang = std::atan2(cross(a, b), dot(a, b));
  if (ang > kPi / 2.0) ang -= kPi;
  if (ang <= -kPi / 2.0) ang += kPi;
  return ang;
}

/// Reduces an angle to (−π/2, π/2].
inline double mod_pi(double a) {
  a = std::remainder(a, kPi);
  if (a <= -kPi / 2.0) a += kPi;
  return a;
}

/// Normalized shape curve of the node grid between node indices k0 ≤ k1
/// (indices taken modulo the period), closed up along the equator by going
/// back over the longitude the curve travelled. Both ends must be collinear.
inline std::vector<ShapeVector> closed_shape_curve(const Orbit& o, std::size_t k0, std::size_t k1,
                                                   std::size_t equator_steps = 720) {
  if (k1 <= k0) throw DomainError("closed_shape_curve: need k0 < k1");
  const std::size_t N = o.nodes.size();
  std::vector<ShapeVector> loop;
  for (std::size_t k = k0; k <= k1; ++k) loop.push_back(shape_of(o.nodes[k % N]).normalized());
  for (std::size_t e : {std::size_t{0}, loop.size() - 1}) {
    if (std::abs(loop[e].u3) > 1e-8) throw DomainError("closed_shape_curve: endpoint is not collinear");
  }
  double travelled = 0.0;
  for (std::size_t i = 1; i < loop.size(); ++i) {
    const double a0 = std::atan2(loop[i - 1].u2, loop[i - 1].u1), a1 = std::atan2(loop[i].u2, loop[i].u1);
    travelled += std::remainder(a1 - a0, 2.0 * kPi);
  }
  const double start = std::atan2(loop.back().u2, loop.back().u1);
  for (std::size_t s = 1; s < equator_steps; ++s) {
    const double a = start - travelled * static_cast<double>(s) / static_cast<double>(equator_steps);
    loop.push_back({std::cos(a), std::sin(a), 0.0});
  }
  return loop;
}

/// Area-rule prediction of euler_line_angle between nodes k0 < k1. With u3
/// the signed area of the triangle, the inertial rotation is −2·(area).
inline double area_rule_angle(const Orbit& o, std::size_t k0, std::size_t k1) {
  return mod_pi(-2.0 * spherical_area(closed_shape_curve(o, k0, k1)));
}

}  // namespace eight
