#pragma once

// Checks on a minimizer path or an integrated orbit: window means and the
// constant-size test levels they are compared against, Sundman margin,
// star shape of the lobes, Euler velocities, and the cross-check between the
// variational and the integrated orbits.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "eight/action_bounds.hpp"
#include "eight/configuration.hpp"
#include "eight/errors.hpp"
#include "eight/integrator.hpp"
#include "eight/minimizer.hpp"
#include "eight/orbit.hpp"
#include "eight/path.hpp"

namespace eight {

struct Check {
  std::string name;
  double value = 0.0;
  double bound = 0.0;
  bool pass = false;
  std::string detail;
};

struct VerificationReport {
  std::vector<Check> checks;

  bool pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
  }
  void add(std::string name, double value, double bound, bool pass, std::string detail = {}) {
    checks.push_back({std::move(name), value, bound, pass, std::move(detail)});
  }
  void append(const VerificationReport& other, const std::string& prefix = {}) {
    for (Check c : other.checks) {
      c.name = prefix + c.name;
      checks.push_back(std::move(c));
    }
  }
  const Check* find(const std::string& name) const {
    for (const Check& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }
};

/// Time averages over a window of length T.
struct MeanValues {
  double T = 0.0;
  double U = 0.0;
  double K = 0.0;
  double I = 0.0;
  double abs_J = 0.0;
  double H = 0.0;  ///< energy of the initial state
  double J_start = 0.0;
  double J_end = 0.0;
};

/// Trapezoid means over m + 1 dense samples of [t0, t1].
inline MeanValues mean_values(const Trajectory& tr, double t0, double t1, std::size_t m = 4096) {
  if (m < 2) throw DomainError("mean_values: need at least 2 intervals");
  if (!(t1 > t0)) throw DomainError("mean_values: empty window");
  MeanValues r;
  r.T = t1 - t0;
  const double h = r.T / static_cast<double>(m);
  double sU = 0, sK = 0, sI = 0, sJ = 0;
  for (std::size_t k = 0; k <= m; ++k) {
    const double t = k == m ? t1 : t0 + h * static_cast<double>(k);
    const Invariants iv = invariants(tr.state_at(t));
    const double w = (k == 0 || k == m) ? 0.5 : 1.0;
    sU += w * iv.U, sK += w * iv.K, sI += w * iv.I, sJ += w * std::abs(iv.J);
    if (k == 0) r.J_start = iv.J;
    if (k == m) r.J_end = iv.J;
  }
  r.U = sU * h / r.T, r.K = sK * h / r.T, r.I = sI * h / r.T, r.abs_J = sJ * h / r.T;
  r.H = energy(tr.state_at(t0));
  return r;
}

/// Means of a discrete path with the action's own quadrature: U by the
/// trapezoid rule on nodes, K on segments. With this pairing the virial
/// identity ⟨K⟩ = ⟨U⟩ holds exactly at a stationary point (scaling variation).
inline MeanValues mean_values(const DiscretePath& p) {
  detail::require_path(p, "mean_values");
  const std::size_t n = p.segments();
  const double h = p.h();
  const std::vector<Configuration> v = node_velocities(p);
  MeanValues r;
  r.T = p.T;
  double sU = 0, sK = 0, sI = 0, sJ = 0;
  for (std::size_t k = 0; k <= n; ++k) {
    const double w = detail::trapezoid_weight(k, n);
    sU += w * potential(p.nodes[k]);
    sI += w * moment_of_inertia(p.nodes[k]);
    sJ += w * std::abs(dot(p.nodes[k], v[k]));
    if (k < n) {
      const Configuration d = (p.nodes[k + 1] - p.nodes[k]) / h;
      sK += dot(d, d);
    }
  }
  r.U = sU * h / r.T, r.K = sK * h / r.T, r.I = sI * h / r.T, r.abs_J = sJ * h / r.T;
  r.J_start = dot(p.nodes.front(), v.front());
  r.J_end = dot(p.nodes.back(), v.back());
  r.H = 0.5 * dot(v.front(), v.front()) - potential(p.nodes.front());
  return r;
}

/// Levels of the optimal constant-size test path at window length T.
struct ReferenceLevels {
  double I0 = 0.0;
  double U0 = 0.0;
  double K0 = 0.0;
  double H0 = 0.0;
  double J0 = 0.0;
  double a = 0.0;
};

inline ReferenceLevels reference_levels(double ell0, double T) {
  const OptimalTest opt = optimal_test_action(ell0, T);
  ReferenceLevels r;
  r.I0 = opt.I0_star;
  r.U0 = r.K0 = ell0 * ell0 * r.I0 / (T * T);
  r.H0 = -0.5 * r.U0;
  r.J0 = std::sqrt(r.I0 * r.K0);
  r.a = opt.a;
  return r;
}

inline VerificationReport lemma8_check(const MeanValues& m, double ell0, double T, double rel_tol = 1e-6) {
  const ReferenceLevels ref = reference_levels(ell0, T);
  VerificationReport rep;
  const double kU = std::abs(m.K - m.U) / m.U;
  rep.add("mean_K_equals_mean_U", kU, rel_tol, kU < rel_tol);
  const double uH = std::abs(m.U + 2.0 * m.H) / m.U;
  rep.add("mean_U_equals_minus_2H", uH, rel_tol, uH < rel_tol);
  rep.add("mean_U_below_U0", m.U, ref.U0, m.U < ref.U0);
  rep.add("H_above_H0", m.H, ref.H0, m.H > ref.H0);
  const double action = -3.0 * m.H * T;
  rep.add("action_below_a", action, ref.a, action < ref.a);
  const double Ib = 36.0 * ell0 * ell0 / (kPi * kPi) * ref.I0;
  rep.add("mean_I_bound", m.I, Ib, m.I < Ib);
  const double Jb = 6.0 * ell0 / kPi * ref.J0;
  rep.add("mean_abs_J_bound", m.abs_J, Jb, m.abs_J < Jb);
  const double Kb = 4.0 * kPi * kPi / (144.0 * T * T) * m.I;
  rep.add("poincare_K_bound", m.K, Kb, m.K > Kb);
  const double jscale = std::sqrt(m.I * m.K);
  const double jend = std::max(std::abs(m.J_start), std::abs(m.J_end)) / jscale;
  rep.add("J_vanishes_at_window_ends", jend, 1e-6, jend < 1e-6);
  return rep;
}

inline double sundman_margin(const State& s) {
  const Invariants iv = invariants(s);
  return iv.I * iv.K - iv.J * iv.J;
}

/// Smallest I·K − J² over the samples.
inline double sundman_check(const std::vector<State>& states) {
  double m = std::numeric_limits<double>::infinity();
  for (const State& s : states) m = std::min(m, sundman_margin(s));
  return m;
}
inline double sundman_check(const Trajectory& tr) { return sundman_check(tr.states); }
inline double sundman_check(const DiscretePath& p) {
  const std::vector<Configuration> v = node_velocities(p);
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < v.size(); ++k) m = std::min(m, sundman_margin({p.nodes[k], v[k]}));
  return m;
}

/// d/dt (x3 ∧ ẋ3) from positions alone.
inline double wedge_rate(const Configuration& x) {
  const SideLengths r = side_lengths(x);
  return (1.0 / (r.r31 * r.r31 * r.r31) - 1.0 / (r.r23 * r.r23 * r.r23)) * cross(x[2], x[0]);
}

struct StarshapeOptions {
  std::size_t samples = 4320;
  double origin_fraction = 1e-4;  ///< |q| below this · max|q| counts as an origin passage
  double fd_step = 1e-5;          ///< finite-difference step as a fraction of the period
  double identity_tol = 1e-4;
};

/// Lobe checks on the curve q = x3 of a full period [0, Tbar] that starts at
/// an origin passage. `state_at` maps t to the state.
template <class Sampler>
VerificationReport starshape_check_sampled(Sampler&& state_at, double Tbar, const StarshapeOptions& opt = {}) {
  const std::size_t m = opt.samples;
  if (m < 48 || m % 12 != 0) throw DomainError("starshape_check: samples must be a multiple of 12, at least 48");
  const double dt = Tbar / static_cast<double>(m);
  std::vector<double> t(m + 1), w(m + 1), d(m + 1), rq(m + 1);
  std::vector<Vec2> q(m + 1);
  double qmax = 0.0;
  for (std::size_t k = 0; k <= m; ++k) {
    t[k] = dt * static_cast<double>(k);
    const State s = state_at(t[k]);
    q[k] = s.q[2];
    w[k] = cross(s.q[2], s.v[2]);
    d[k] = wedge_rate(s.q);
    rq[k] = norm(q[k]);
    qmax = std::max(qmax, rq[k]);
  }
  const double eps = opt.origin_fraction * qmax;
  const std::size_t half = m / 2, sixth = m / 6, quarter = m / 4;
  VerificationReport rep;

  double worst = -std::numeric_limits<double>::infinity(), at = 0.0;
  for (std::size_t k = 1; k < half; ++k)
    if (rq[k] >= eps && w[k] > worst) worst = w[k], at = t[k];
  rep.add("wedge_negative_first_half", worst, 0.0, worst < 0.0, "t = " + std::to_string(at));

  worst = std::numeric_limits<double>::infinity();
  for (std::size_t k = half + 1; k < m; ++k)
    if (rq[k] >= eps && w[k] < worst) worst = w[k], at = t[k];
  rep.add("wedge_positive_second_half", worst, 0.0, worst > 0.0, "t = " + std::to_string(at));

  std::size_t stray = 0;
  for (std::size_t k = 0; k < m; ++k) {
    const bool zero = w[k] == 0.0 || w[k] * w[k + 1] < 0.0;
    if (zero && std::min(rq[k], rq[k + 1]) >= eps) ++stray;
  }
  rep.add("wedge_zeros_only_at_origin", static_cast<double>(stray), 0.0, stray == 0);

  double dmax = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < sixth; ++k) dmax = std::max(dmax, d[k]);
  rep.add("wedge_decreasing_to_sixth", dmax, 0.0, dmax < 0.0);
  double dmin = std::numeric_limits<double>::infinity();
  for (std::size_t k = sixth + 1; k < quarter; ++k) dmin = std::min(dmin, d[k]);
  rep.add("wedge_increasing_sixth_to_quarter", dmin, 0.0, dmin > 0.0);

  // unwrapped polar angle of q; first step leaves the origin
  double step_max = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k + 1 < half; ++k) {
    if (rq[k] < eps || rq[k + 1] < eps) continue;
    const double dth = std::atan2(cross(q[k], q[k + 1]), dot(q[k], q[k + 1]));
    step_max = std::max(step_max, dth);
  }
  rep.add("polar_angle_decreasing", step_max, 0.0, step_max < 0.0);

  const double delta = opt.fd_step * Tbar;
  double err = 0.0, scale = 0.0;
  for (std::size_t k = 1; k < m; ++k) {
    const State a = state_at(t[k] - delta), b = state_at(t[k] + delta);
    const double fd = (cross(b.q[2], b.v[2]) - cross(a.q[2], a.v[2])) / (2.0 * delta);
    err = std::max(err, std::abs(fd - d[k]));
    scale = std::max(scale, std::abs(d[k]));
  }
  const double rel = err / scale;
  rep.add("wedge_derivative_identity", rel, opt.identity_tol, rel < opt.identity_tol);
  return rep;
}

inline VerificationReport starshape_check(const Orbit& o, const StarshapeOptions& opt = {}) {
  return starshape_check_sampled([&o](double t) { return o.state_at(t); }, o.Tbar, opt);
}
inline VerificationReport starshape_check(const Trajectory& tr, double Tbar, const StarshapeOptions& opt = {}) {
  return starshape_check_sampled([&tr](double t) { return tr.state_at(t); }, Tbar, opt);
}

/// For a collinear state with body i at the midpoint of the other two,
/// |v_j − v_k| + |v_j + v_i/2|.
inline double euler_velocity_constraint(const State& s, double tol = 1e-6) {
  const double I = moment_of_inertia(s.q);
  if (!(I > 0.0)) throw DomainError("euler_velocity_constraint: degenerate configuration");
  if (std::abs(signed_area(s.q)) > tol * I) throw DomainError("euler_velocity_constraint: not collinear");
  for (std::size_t i = 0; i < 3; ++i) {
    const std::size_t j = (i + 1) % 3, k = (i + 2) % 3;
    const Vec2 mid = (s.q[j] + s.q[k]) * 0.5;
    if (norm(s.q[i] - mid) <= tol * std::sqrt(I)) {
      return norm(s.v[j] - s.v[k]) + norm(s.v[j] + s.v[i] * 0.5);
    }
  }
  throw DomainError("euler_velocity_constraint: no body at the midpoint");
}

/// Max over samples of (max − min)/|mean| for I and U.
struct Variation {
  double I = 0.0;
  double U = 0.0;
};
inline Variation relative_variation(const std::vector<State>& states) {
  double Imin = 1e300, Imax = -1e300, Umin = 1e300, Umax = -1e300, Is = 0, Us = 0;
  for (const State& s : states) {
    const double I = moment_of_inertia(s.q), U = potential(s.q);
    Imin = std::min(Imin, I), Imax = std::max(Imax, I), Umin = std::min(Umin, U), Umax = std::max(Umax, U);
    Is += I, Us += U;
  }
  const double n = static_cast<double>(states.size());
  return {(Imax - Imin) / (Is / n), (Umax - Umin) / (Us / n)};
}

struct CrossValidation {
  double hausdorff = 0.0;
  double rotation = 0.0;    ///< angle applied to the first curve
  double time_shift = 0.0;  ///< in units of the second period
  bool reversed = false;
  double length_scale = 1.0;
  double rms = 0.0;  ///< paired distance after the fit
};

namespace detail {
inline double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double L2 = dot(ab, ab);
  const double s = L2 > 0.0 ? std::clamp(dot(p - a, ab) / L2, 0.0, 1.0) : 0.0;
  return norm(p - (a + ab * s));
}
// Directed distance from the points of A to the closed polyline B.
inline double directed_hausdorff(const std::vector<Vec2>& A, const std::vector<Vec2>& B) {
  double h = 0.0;
  for (const Vec2& p : A) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < B.size(); ++k)
      best = std::min(best, point_segment_distance(p, B[k], B[(k + 1) % B.size()]));
    h = std::max(h, best);
  }
  return h;
}
}  // namespace detail

/// Symmetric Hausdorff distance between two closed polylines.
inline double hausdorff_distance(const std::vector<Vec2>& A, const std::vector<Vec2>& B) {
  return std::max(detail::directed_hausdorff(A, B), detail::directed_hausdorff(B, A));
}

/// Fits curve A (period Ta) onto curve B (period Tb) after Kepler rescaling
/// x ↦ (Tb/Ta)^{2/3} x, by a rotation and a cyclic time shift (either time
/// direction), then measures the Hausdorff distance of the q curves.
template <class SamplerA, class SamplerB>
CrossValidation cross_validate(SamplerA&& qa, double Ta, SamplerB&& qb, double Tb, std::size_t m = 2048) {
  if (m < 8) throw DomainError("cross_validate: too few samples");
  CrossValidation r;
  r.length_scale = std::pow(Tb / Ta, 2.0 / 3.0);
  std::vector<Vec2> A(m), B(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double s = static_cast<double>(k) / static_cast<double>(m);
    A[k] = qa(s * Ta) * r.length_scale;
    B[k] = qb(s * Tb);
  }
  double nA = 0, nB = 0;
  for (std::size_t k = 0; k < m; ++k) nA += dot(A[k], A[k]), nB += dot(B[k], B[k]);
  double best = std::numeric_limits<double>::infinity();
  for (int dir : {1, -1}) {
    for (std::size_t s = 0; s < m; ++s) {
      double c = 0, x = 0;
      for (std::size_t k = 0; k < m; ++k) {
        const std::size_t j = (dir > 0 ? s + k : s + m - k) % m;
        c += dot(A[k], B[j]), x += cross(A[k], B[j]);
      }
      const double res = nA + nB - 2.0 * std::hypot(c, x);
      if (res < best) {
        best = res;
        r.rotation = std::atan2(x, c);
        r.time_shift = static_cast<double>(s) / static_cast<double>(m);
        r.reversed = dir < 0;
      }
    }
  }
  r.rms = std::sqrt(std::max(best, 0.0) / static_cast<double>(m));
  for (Vec2& p : A) p = rotated(p, r.rotation);
  r.hausdorff = hausdorff_distance(A, B);
  return r;
}

inline CrossValidation cross_validate(const Orbit& built, const Trajectory& tr, double Tbar, std::size_t m = 2048) {
  return cross_validate([&built](double t) { return built.q_at(t); }, built.Tbar,
                        [&tr](double t) { return tr.state_at(t).q[2]; }, Tbar, m);
}

}  // namespace eight
