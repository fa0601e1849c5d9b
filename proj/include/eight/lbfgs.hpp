#pragma once

// Preconditioned limited-memory BFGS with backtracking line search and a
// nonlinear conjugate-gradient fallback.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include "eight/errors.hpp"

namespace eight {

using Vector = std::vector<double>;

struct LbfgsOptions {
  double tol = 1e-9;           ///< stop when gradient_norm(x, g) < tol
  std::size_t max_iter = 20000;
  std::size_t memory = 20;
  double armijo = 1e-4;
  /// Relative size of the action's rounding noise. When a step decreases the
  /// objective by less than this, it is accepted only if it also reduces the
  /// gradient norm.
  double noise = 1e-15;
  /// Give up (not converged) when the best gradient norm has not dropped by
  /// 0.1% within this many iterations; 0 disables.
  std::size_t stall_iter = 1000;
};

struct LbfgsResult {
  Vector x;
  double f = 0.0;
  double gradient_norm = 0.0;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  std::size_t cg_steps = 0;
  bool converged = false;
  bool stalled = false;
  std::vector<double> history;  ///< objective after each accepted step
};

/// f(x, g) returns the objective and writes its gradient into g (same size as x).
using Objective = std::function<double(const Vector&, Vector&)>;
/// precondition(g, out) writes M⁻¹g, M symmetric positive definite.
using Preconditioner = std::function<void(const Vector&, Vector&)>;
/// Convergence measure of a gradient (default Euclidean norm).
using GradientNorm = std::function<double(const Vector&, const Vector&)>;
/// Called after every accepted step; may throw to abort.
using StepHook = std::function<void(const Vector&)>;

namespace detail {

inline double dotv(const Vector& a, const Vector& b) {
  long double s = 0.0L;
  for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<long double>(a[i]) * b[i];
  return static_cast<double>(s);
}

}  // namespace detail

inline LbfgsResult lbfgs_minimize(const Objective& f, Vector x, const LbfgsOptions& opt,
                                  const Preconditioner& precondition = {}, const GradientNorm& gnorm = {},
                                  const StepHook& hook = {}) {
  using detail::dotv;
  const std::size_t dim = x.size();
  auto apply_m = [&](const Vector& g, Vector& out) {
    if (precondition) precondition(g, out);
    else out = g;
  };
  auto measure = [&](const Vector& xx, const Vector& g) {
    return gnorm ? gnorm(xx, g) : std::sqrt(dotv(g, g));
  };

  LbfgsResult res;
  Vector g(dim), gn(dim), d(dim), xn(dim), q(dim), r(dim);
  double fx = f(x, g);
  ++res.evaluations;
  if (!std::isfinite(fx)) throw DomainError("lbfgs: objective is not finite at the initial point");
  double gnrm = measure(x, g);

  struct Pair {
    Vector s, y;
    double rho;
  };
  std::deque<Pair> mem;
  double gamma = 1.0;
  bool use_cg = false;
  Vector g_prev, d_prev, mg_prev;

  double best = gnrm;
  std::size_t best_at = 0;
  for (res.iterations = 0; res.iterations < opt.max_iter; ++res.iterations) {
    if (gnrm < opt.tol) {
      res.converged = true;
      break;
    }
    if (gnrm < (1.0 - 1e-3) * best) {
      best = gnrm;
      best_at = res.iterations;
    } else if (opt.stall_iter > 0 && res.iterations - best_at >= opt.stall_iter) {
      res.stalled = true;
      break;
    }
    // search direction
    if (!use_cg) {
      q = g;
      std::vector<double> alpha(mem.size());
      for (std::size_t i = mem.size(); i-- > 0;) {
        alpha[i] = mem[i].rho * dotv(mem[i].s, q);
        for (std::size_t j = 0; j < dim; ++j) q[j] -= alpha[i] * mem[i].y[j];
      }
      apply_m(q, r);
      for (auto& v : r) v *= gamma;
      for (std::size_t i = 0; i < mem.size(); ++i) {
        const double beta = mem[i].rho * dotv(mem[i].y, r);
        for (std::size_t j = 0; j < dim; ++j) r[j] += (alpha[i] - beta) * mem[i].s[j];
      }
      for (std::size_t j = 0; j < dim; ++j) d[j] = -r[j];
    } else {
      // preconditioned Polak-Ribière+
      Vector mg(dim);
      apply_m(g, mg);
      double beta = 0.0;
      if (!g_prev.empty()) {
        double num = 0.0;
        for (std::size_t j = 0; j < dim; ++j) num += mg[j] * (g[j] - g_prev[j]);
        beta = std::max(0.0, num / dotv(g_prev, mg_prev));
      }
      for (std::size_t j = 0; j < dim; ++j) d[j] = -mg[j] + (d_prev.empty() ? 0.0 : beta * d_prev[j]);
      g_prev = g;
      mg_prev = mg;
      ++res.cg_steps;
    }
    double slope = dotv(g, d);
    if (!(slope < 0.0)) {
      apply_m(g, r);
      for (std::size_t j = 0; j < dim; ++j) d[j] = -r[j];
      slope = dotv(g, d);
      mem.clear();
    }

    // backtracking line search
    double step = 1.0;
    if (mem.empty() && !use_cg && res.iterations == 0) {
      // first step: keep the move modest relative to x
      const double dn = std::sqrt(dotv(d, d)), xnrm = std::sqrt(dotv(x, x));
      if (dn > 0.1 * (1.0 + xnrm)) step = 0.1 * (1.0 + xnrm) / dn;
    }
    bool accepted = false;
    double fn = 0.0, gnn = 0.0;
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t j = 0; j < dim; ++j) xn[j] = x[j] + step * d[j];
      fn = f(xn, gn);
      ++res.evaluations;
      if (std::isfinite(fn)) {
        if (fn <= fx + opt.armijo * step * slope) {
          accepted = true;
        } else if (fn <= fx + opt.noise * std::abs(fx)) {
          gnn = measure(xn, gn);
          accepted = gnn < gnrm;
        }
        if (accepted) break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (!use_cg && !mem.empty()) {
        // curvature information is misleading here: restart with CG
        mem.clear();
        use_cg = true;
        g_prev.clear();
        d_prev.clear();
        continue;
      }
      res.x = x;
      res.f = fx;
      res.gradient_norm = gnrm;
      throw ConvergenceError("lbfgs: line search failed (|g| = " + std::to_string(gnrm) + ")", fx);
    }

    // curvature pair
    Pair p{Vector(dim), Vector(dim), 0.0};
    for (std::size_t j = 0; j < dim; ++j) {
      p.s[j] = xn[j] - x[j];
      p.y[j] = gn[j] - g[j];
    }
    const double sy = dotv(p.s, p.y);
    if (sy > 1e-12 * std::sqrt(dotv(p.s, p.s) * dotv(p.y, p.y))) {
      Vector my(dim);
      apply_m(p.y, my);
      gamma = sy / dotv(p.y, my);
      p.rho = 1.0 / sy;
      mem.push_back(std::move(p));
      if (mem.size() > opt.memory) mem.pop_front();
      if (use_cg) use_cg = false;  // curvature is healthy again
    } else if (!use_cg) {
      use_cg = true;
      g_prev.clear();
      d_prev.clear();
      mem.clear();
    }
    if (use_cg) d_prev = d;

    x.swap(xn);
    g.swap(gn);
    fx = fn;
    gnrm = measure(x, g);
    res.history.push_back(fx);
    if (hook) hook(x);
  }
  res.x = std::move(x);
  res.f = fx;
  res.gradient_norm = gnrm;
  return res;
}

}  // namespace eight
