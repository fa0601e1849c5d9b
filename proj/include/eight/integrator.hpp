#pragma once

// Adaptive integration of the planar equal-mass three-body equations, with
// dense output, the first variational equations, and period refinement.
//
// Stepping uses the Fehlberg 7(8) pair from Boost.Odeint under a local
// accept/reject controller; only the single-step kernel comes from Odeint.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/tools/minima.hpp>
#include <boost/numeric/odeint/stepper/runge_kutta_fehlberg78.hpp>

#include "eight/configuration.hpp"
#include "eight/errors.hpp"

namespace eight {

using PhaseVector = std::array<double, 12>;

inline PhaseVector to_phase(const State& s) {
  PhaseVector y{};
  for (std::size_t i = 0; i < 3; ++i) {
    y[2 * i] = s.q[i].x, y[2 * i + 1] = s.q[i].y;
    y[6 + 2 * i] = s.v[i].x, y[6 + 2 * i + 1] = s.v[i].y;
  }
  return y;
}

template <class Y>
State from_phase(const Y& y) {
  State s;
  for (std::size_t i = 0; i < 3; ++i) {
    s.q[i] = {y[2 * i], y[2 * i + 1]};
    s.v[i] = {y[6 + 2 * i], y[6 + 2 * i + 1]};
  }
  return s;
}

/// Figure-eight initial data at the E3 Euler configuration (8 published digits).
inline State simo_initial_state() {
  const Vec2 x1{0.97000436, -0.24308753};
  const Vec2 V{-0.93240737, -0.86473146};
  return {{{x1, -x1, Vec2{}}}, {{V * -0.5, V * -0.5, V}}};
}

inline constexpr double kSimoPeriod = 6.32591398;

struct IntegratorStats {
  std::size_t steps = 0;
  std::size_t rejected = 0;
  double tol = 0.0;
  int order = 8;
};

enum class DenseOrder { cubic = 3, quintic = 5 };

namespace detail {

/// Accept/reject driver around a single-step embedded pair. Lands exactly on
/// every time in `stops` (ordered in the direction of integration) and calls
/// on_step(t, y, stop_index) after each accepted step, stop_index = −1 when
/// the step did not end on a stop. h0 > 0 overrides the starting step.
template <std::size_t N, class Sys, class OnStep>
void drive_rkf78(Sys&& sys, std::array<double, N> y, double t0, const std::vector<double>& stops, double tol,
                 IntegratorStats& stats, OnStep&& on_step, double h0 = 0.0) {
  namespace odeint = boost::numeric::odeint;
  using Y = std::array<double, N>;
  if (!(tol > 0.0) || !std::isfinite(tol)) throw DomainError("integrate: tol must be positive");
  if (stops.empty()) return;
  const double t_end = stops.back();
  const double dir = t_end >= t0 ? 1.0 : -1.0;
  odeint::runge_kutta_fehlberg78<Y> stepper;
  auto rhs = [&](const Y& x, Y& dx, double t) { sys(x, dx, t); };

  Y f{}, out{}, err{};
  rhs(y, f, t0);
  // starting step from the scale of y and y'
  double ny = 0.0, nf = 0.0;
  for (std::size_t i = 0; i < N; ++i) ny = std::max(ny, std::abs(y[i])), nf = std::max(nf, std::abs(f[i]));
  double dt = dir * std::min(std::abs(t_end - t0), nf > 0.0 ? 0.01 * std::max(ny, 1e-3) / nf : 1e-2);
  if (dt == 0.0) dt = dir * 1e-3;
  if (h0 > 0.0) dt = dir * h0;

  double t = t0;
  std::size_t next = 0;
  while (next < stops.size() && dir * (stops[next] - t) <= 0.0) {
    on_step(t, y, static_cast<std::ptrdiff_t>(next));
    ++next;
  }
  constexpr std::size_t kMaxSteps = 50'000'000;
  while (next < stops.size()) {
    if (stats.steps + stats.rejected > kMaxSteps) throw StepUnderflowError("integrate: step budget exhausted", t);
    double h = dt;
    bool lands = false;
    if (dir * (t + h - stops[next]) >= 0.0) {
      h = stops[next] - t;
      lands = true;
    }
    if (std::abs(h) < 1e-14 * std::max(1.0, std::abs(t))) {
      if (lands) {  // a stop within rounding of t
        on_step(t, y, static_cast<std::ptrdiff_t>(next++));
        continue;
      }
      throw StepUnderflowError("integrate: step size underflow at t = " + std::to_string(t), t);
    }
    stepper.do_step(rhs, y, t, out, h, err);
    double e = 0.0;
    bool finite = true;
    for (std::size_t i = 0; i < N; ++i) {
      if (!std::isfinite(out[i])) finite = false;
      const double sc = tol * (1.0 + std::max(std::abs(y[i]), std::abs(out[i])));
      e = std::max(e, std::abs(err[i]) / sc);
    }
    if (!finite) e = 1e10;
    const double grow = e == 0.0 ? 4.0 : std::clamp(0.9 * std::pow(e, -1.0 / 8.0), 0.2, 4.0);
    if (e <= 1.0) {
      t = lands ? stops[next] : t + h;
      y = out;
      ++stats.steps;
      on_step(t, y, lands ? static_cast<std::ptrdiff_t>(next) : -1);
      if (lands) ++next;
      // a landing step shortened below the controller's proposal says
      // nothing about the next step
      if (!(lands && std::abs(h) < std::abs(dt))) dt = h * grow;
    } else {
      ++stats.rejected;
      dt = h * grow;
    }
  }
}

struct NewtonSystem {
  void operator()(const PhaseVector& y, PhaseVector& dy, double) const {
    const State s = from_phase(y);
    const Configuration a = accelerations(s.q);
    for (std::size_t i = 0; i < 6; ++i) dy[i] = y[6 + i];
    for (std::size_t i = 0; i < 3; ++i) dy[6 + 2 * i] = a[i].x, dy[6 + 2 * i + 1] = a[i].y;
  }
};

}  // namespace detail

class Trajectory {
 public:
  std::vector<double> t_grid;
  std::vector<State> states;
  std::vector<Invariants> invariants_log;
  IntegratorStats stats;
  DenseOrder dense_order = DenseOrder::quintic;

  const State& initial() const { return states.front(); }
  const State& final_state() const { return states.back(); }
  double t_end() const { return t_grid.back(); }

  /// Max over samples of |H(t) − H(0)| and |C(t) − C(0)|.
  double energy_drift() const { return drift(&Invariants::H); }
  double angular_momentum_drift() const { return drift(&Invariants::C); }
  /// Max over samples of |Σ v_i| relative to the initial total momentum.
  double momentum_drift() const {
    double m = 0.0;
    const Vec2 p0 = center_sum(states.front().v);
    for (const State& s : states) m = std::max(m, norm(center_sum(s.v) - p0));
    return m;
  }

  /// Dense output between accepted steps (Hermite interpolation of order 3
  /// or 5 on positions; velocities from its derivative).
  State state_at(double t) const {
    if (step_t_.empty()) throw DomainError("Trajectory: no steps recorded");
    const bool fwd = step_t_.back() >= step_t_.front();
    const double lo = fwd ? step_t_.front() : step_t_.back(), hi = fwd ? step_t_.back() : step_t_.front();
    if (t < lo - 1e-12 * (1.0 + std::abs(lo)) || t > hi + 1e-12 * (1.0 + std::abs(hi))) {
      throw DomainError("Trajectory::state_at: time outside the integrated range");
    }
    std::size_t k;
    if (fwd) {
      k = static_cast<std::size_t>(std::upper_bound(step_t_.begin(), step_t_.end(), t) - step_t_.begin());
    } else {
      k = static_cast<std::size_t>(
          std::upper_bound(step_t_.begin(), step_t_.end(), t, [](double a, double b) { return a > b; }) -
          step_t_.begin());
    }
    k = std::clamp<std::size_t>(k, 1, step_t_.size() - 1);
    return hermite(k - 1, t);
  }

  void record_step(double t, const State& s) {
    if (!step_t_.empty() && t == step_t_.back()) return;
    step_t_.push_back(t);
    step_s_.push_back(s);
    step_a_.push_back(accelerations(s.q));
  }
  std::size_t recorded_steps() const { return step_t_.size(); }

 private:
  double drift(double Invariants::*field) const {
    double m = 0.0;
    for (const Invariants& iv : invariants_log) m = std::max(m, std::abs(iv.*field - invariants_log.front().*field));
    return m;
  }

  State hermite(std::size_t k, double t) const {
    const double h = step_t_[k + 1] - step_t_[k];
    const double s = (t - step_t_[k]) / h;
    const State &a = step_s_[k], &b = step_s_[k + 1];
    const Configuration &A0 = step_a_[k], &A1 = step_a_[k + 1];
    State r;
    if (dense_order == DenseOrder::cubic) {
      const double s2 = s * s, s3 = s2 * s;
      const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s, h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
      r.q = a.q * h00 + a.v * (h * h10) + b.q * h01 + b.v * (h * h11);
      r.v = a.v * h00 + A0 * (h * h10) + b.v * h01 + A1 * (h * h11);
      return r;
    }
    const double s2 = s * s, s3 = s2 * s, s4 = s3 * s, s5 = s4 * s;
    const double H0 = 1 - 10 * s3 + 15 * s4 - 6 * s5, H1 = s - 6 * s3 + 8 * s4 - 3 * s5,
                 H2 = 0.5 * s2 - 1.5 * s3 + 1.5 * s4 - 0.5 * s5, H3 = 0.5 * s3 - s4 + 0.5 * s5,
                 H4 = -4 * s3 + 7 * s4 - 3 * s5, H5 = 10 * s3 - 15 * s4 + 6 * s5;
    const double D0 = -30 * s2 + 60 * s3 - 30 * s4, D1 = 1 - 18 * s2 + 32 * s3 - 15 * s4,
                 D2 = s - 4.5 * s2 + 6 * s3 - 2.5 * s4, D3 = 1.5 * s2 - 4 * s3 + 2.5 * s4,
                 D4 = -12 * s2 + 28 * s3 - 15 * s4, D5 = 30 * s2 - 60 * s3 + 30 * s4;
    r.q = a.q * H0 + a.v * (h * H1) + A0 * (h * h * H2) + A1 * (h * h * H3) + b.v * (h * H4) + b.q * H5;
    r.v = a.q * (D0 / h) + a.v * D1 + A0 * (h * D2) + A1 * (h * D3) + b.v * D4 + b.q * (D5 / h);
    return r;
  }

  std::vector<double> step_t_;
  std::vector<State> step_s_;
  std::vector<Configuration> step_a_;
};

/// Integrates from t = 0 to t_end (either sign) with `samples` ≥ 2 evenly
/// spaced output times including both ends; every sample is a step endpoint.
inline Trajectory integrate(const State& s0, double t_end, double tol, std::size_t samples = 2,
                            DenseOrder dense = DenseOrder::quintic) {
  if (!std::isfinite(t_end) || t_end == 0.0) throw DomainError("integrate: t_end must be finite and nonzero");
  if (samples < 2) throw DomainError("integrate: need at least 2 samples");
  const SideLengths r0 = side_lengths(s0.q);
  if (!(std::min({r0.r12, r0.r23, r0.r31}) > 0.0)) throw CollisionError("integrate: initial state has a collision");
  Trajectory tr;
  tr.stats.tol = tol;
  tr.dense_order = dense;
  std::vector<double> stops(samples);
  for (std::size_t j = 0; j < samples; ++j) stops[j] = t_end * static_cast<double>(j) / (samples - 1);
  stops.back() = t_end;
  tr.t_grid.reserve(samples);
  tr.states.reserve(samples);
  detail::drive_rkf78<12>(detail::NewtonSystem{}, to_phase(s0), 0.0, stops, tol, tr.stats,
                          [&](double t, const PhaseVector& y, std::ptrdiff_t stop) {
                            const State s = from_phase(y);
                            tr.record_step(t, s);
                            if (stop >= 0) {
                              tr.t_grid.push_back(t);
                              tr.states.push_back(s);
                              tr.invariants_log.push_back(invariants(s));
                            }
                          });
  return tr;
}

/// Max-norm distance over the 12 phase coordinates.
inline double periodicity_defect(const State& a, const State& b) { return max_abs_difference(a, b); }

/// Jacobian blocks ∂a_i/∂x_j (2×2, row-major) of the accelerations.
inline std::array<std::array<std::array<double, 4>, 3>, 3> acceleration_jacobian(const Configuration& c) {
  std::array<std::array<std::array<double, 4>, 3>, 3> J{};
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      if (i == j) continue;
      const Vec2 d = c[j] - c[i];
      const double r2 = norm2(d);
      if (!(r2 > 0.0)) throw CollisionError("acceleration_jacobian: collision");
      const double r = std::sqrt(r2), r3 = r2 * r, r5 = r3 * r2;
      const std::array<double, 4> B{1.0 / r3 - 3.0 * d.x * d.x / r5, -3.0 * d.x * d.y / r5,
                                    -3.0 * d.y * d.x / r5, 1.0 / r3 - 3.0 * d.y * d.y / r5};
      for (std::size_t e = 0; e < 4; ++e) {
        J[i][j][e] += B[e];
        J[i][i][e] -= B[e];
      }
    }
  }
  return J;
}

struct MonodromyResult {
  Eigen::Matrix<double, 12, 12> matrix;
  std::array<std::complex<double>, 12> eigenvalues;
  State final_state;
  IntegratorStats stats;

  double determinant() const { return matrix.determinant(); }
  double max_modulus_deviation() const {
    double m = 0.0;
    for (const auto& l : eigenvalues) m = std::max(m, std::abs(std::abs(l) - 1.0));
    return m;
  }
  std::size_t unit_count(double tol) const {
    std::size_t c = 0;
    for (const auto& l : eigenvalues) c += std::abs(l - 1.0) < tol;
    return c;
  }
};

/// Flow map linearization over one period from the variational equations
/// δẋ = δv, δv̇ = Da(x)·δx, integrated with the orbit (12 + 144 unknowns).
inline MonodromyResult monodromy(const State& s0, double period, double tol) {
  if (!(period > 0.0)) throw DomainError("monodromy: period must be positive");
  using Y = std::array<double, 12 + 144>;
  Y y{};
  const PhaseVector p = to_phase(s0);
  std::copy(p.begin(), p.end(), y.begin());
  for (std::size_t c = 0; c < 12; ++c) y[12 + 12 * c + c] = 1.0;  // column-major tangent columns
  auto sys = [](const Y& x, Y& dx, double) {
    PhaseVector base;
    std::copy(x.begin(), x.begin() + 12, base.begin());
    PhaseVector db;
    detail::NewtonSystem{}(base, db, 0.0);
    std::copy(db.begin(), db.end(), dx.begin());
    const auto J = acceleration_jacobian(from_phase(base).q);
    for (std::size_t c = 0; c < 12; ++c) {
      const double* col = &x[12 + 12 * c];
      double* out = &dx[12 + 12 * c];
      for (std::size_t i = 0; i < 6; ++i) out[i] = col[6 + i];
      for (std::size_t i = 0; i < 3; ++i) {
        double ax = 0.0, ay = 0.0;
        for (std::size_t j = 0; j < 3; ++j) {
          const auto& B = J[i][j];
          ax += B[0] * col[2 * j] + B[1] * col[2 * j + 1];
          ay += B[2] * col[2 * j] + B[3] * col[2 * j + 1];
        }
        out[6 + 2 * i] = ax;
        out[6 + 2 * i + 1] = ay;
      }
    }
  };
  MonodromyResult r;
  r.stats.tol = tol;
  Y last = y;
  detail::drive_rkf78<12 + 144>(sys, y, 0.0, std::vector<double>{period}, tol, r.stats,
                                [&](double, const Y& x, std::ptrdiff_t) { last = x; });
  for (std::size_t c = 0; c < 12; ++c) {
    for (std::size_t i = 0; i < 12; ++i) r.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = last[12 + 12 * c + i];
  }
  r.final_state = from_phase(last);
  Eigen::EigenSolver<Eigen::Matrix<double, 12, 12>> es(r.matrix, false);
  if (es.info() != Eigen::Success) throw ConvergenceError("monodromy: eigenvalue iteration failed", 0.0);
  for (Eigen::Index i = 0; i < 12; ++i) r.eigenvalues[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
  std::sort(r.eigenvalues.begin(), r.eigenvalues.end(), [](const auto& a, const auto& b) {
    return std::arg(a) < std::arg(b) || (std::arg(a) == std::arg(b) && std::abs(a) < std::abs(b));
  });
  return r;
}

struct PeriodRefinement {
  double period = 0.0;
  double defect = 0.0;        ///< max-norm defect at the refined period
  double guess_defect = 0.0;  ///< max-norm defect at the guess
  std::size_t evaluations = 0;
};

/// Minimizes |state(T) − state(0)|₂ over T ∈ [Tguess − width, Tguess + width].
/// One integration to the lower end of the bracket is reused for every trial.
inline PeriodRefinement refine_period(const State& s0, double Tguess, double tol = 1e-12, double width = 1e-3) {
  if (!(Tguess > width) || !(width > 0.0)) throw DomainError("refine_period: need Tguess > width > 0");
  const double lo = Tguess - width, hi = Tguess + width;
  const State base = integrate(s0, lo, tol).final_state();
  PeriodRefinement r;
  auto state_at = [&](double T) {
    if (T == lo) return base;
    return integrate(base, T - lo, tol).final_state();
  };
  auto objective = [&](double T) {
    ++r.evaluations;
    const State s = state_at(T);
    double e = 0.0;
    const PhaseVector a = to_phase(s), b = to_phase(s0);
    for (std::size_t i = 0; i < 12; ++i) e += (a[i] - b[i]) * (a[i] - b[i]);
    return e;
  };
  const auto [Tmin, fmin] = boost::math::tools::brent_find_minima(objective, lo, hi, 40);
  (void)fmin;
  if (Tmin - lo < 1e-3 * width || hi - Tmin < 1e-3 * width) {
    throw ConvergenceError("refine_period: no interior minimum of the defect near the guess", Tmin);
  }
  r.period = Tmin;
  r.defect = periodicity_defect(state_at(Tmin), s0);
  r.guess_defect = periodicity_defect(state_at(Tguess), s0);
  return r;
}

}  // namespace eight
