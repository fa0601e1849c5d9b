#pragma once

// length → bounds → minimize → build → integrate → verify, with one JSON
// report. Nothing time-dependent goes into the report, so equal configs give
// byte-identical output.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "eight/action_bounds.hpp"
#include "eight/equipotential.hpp"
#include "eight/integrator.hpp"
#include "eight/io.hpp"
#include "eight/minimizer.hpp"
#include "eight/orbit.hpp"
#include "eight/verification.hpp"

namespace eight {

enum ExitCode : int { kExitPass = 0, kExitVerifyFail = 1, kExitInvalid = 2, kExitStage = 3 };

struct RunConfig {
  double period = kTwelfth;  ///< T, the time from E3 to M1
  std::size_t segments = 512;
  double minimize_tol = 1e-10;
  std::size_t max_iter = 100000;
  double integrate_tol = 1e-12;
  std::string ics = "simo";  ///< "simo" or a state JSON file
  double orbit_period = kSimoPeriod;  ///< T̄ of the integrated orbit
  std::size_t csv_samples = 2001;
  double rel_tol = 1e-6;
  std::string out_dir;  ///< artifacts are written only when set

  void validate() const {
    auto positive = [](double v, const char* what) {
      if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(std::string(what) + " must be positive and finite");
    };
    positive(period, "period");
    positive(minimize_tol, "minimize tolerance");
    positive(integrate_tol, "integration tolerance");
    positive(orbit_period, "orbit period");
    positive(rel_tol, "relative tolerance");
    if (segments < 2) throw DomainError("segments must be at least 2");
    if (max_iter == 0) throw DomainError("max_iter must be positive");
    if (csv_samples < 2) throw DomainError("csv samples must be at least 2");
  }
};

struct PipelineResult {
  int exit_code = kExitPass;
  std::string failed_stage;
  std::string message;
  json report;
};

/// Initial state from "simo" or a JSON file; rejects collisions.
inline State load_initial_state(const std::string& ics) {
  State s = ics == "simo" ? simo_initial_state() : state_from_json(read_json_file(ics));
  const SideLengths r = side_lengths(s.q);
  if (!(r.min() > 0.0)) throw CollisionError("initial state has a collision");
  for (const Configuration* c : {&s.q, &s.v})
    for (std::size_t i = 0; i < 3; ++i)
      if (!std::isfinite((*c)[i].x) || !std::isfinite((*c)[i].y)) throw DomainError("initial state is not finite");
  return s;
}

inline json config_json(const RunConfig& c) {
  return {{"period", c.period},           {"segments", c.segments},     {"minimize_tol", c.minimize_tol},
          {"max_iter", c.max_iter},       {"integrate_tol", c.integrate_tol}, {"ics", c.ics},
          {"orbit_period", c.orbit_period}, {"csv_samples", c.csv_samples}, {"rel_tol", c.rel_tol}};
}

/// Checks shared by `verify` and `run` on an integrated trajectory over one
/// period Tbar.
inline VerificationReport verify_trajectory(const Trajectory& tr, double ell0, double Tbar, double rel_tol = 1e-6) {
  VerificationReport rep;
  const double T = Tbar / 12.0;
  rep.append(lemma8_check(mean_values(tr, 0.0, T), ell0, T, rel_tol), "means.");
  const double sm = sundman_check(tr);
  rep.add("sundman_margin", sm, -1e-9, sm >= -1e-9);
  rep.append(starshape_check(tr, Tbar), "starshape.");
  return rep;
}

inline VerificationReport verify_orbit(const Orbit& o, double ell0, double rel_tol = 1e-6) {
  VerificationReport rep;
  const DiscretePath arc = twelfth_arc(o);
  rep.append(lemma8_check(mean_values(arc), ell0, arc.T, rel_tol), "means.");
  const double sm = sundman_check(arc);
  rep.add("sundman_margin", sm, -1e-9, sm >= -1e-9);
  const double cr = choreography_residual(o);
  rep.add("choreography_residual", cr, 1e-5, cr < 1e-5);
  rep.append(starshape_check(o), "starshape.");
  return rep;
}

inline PipelineResult run_pipeline(const RunConfig& cfg) {
  PipelineResult res;
  json& rep = res.report;
  try {
    cfg.validate();
  } catch (const Error& e) {
    res.exit_code = kExitInvalid;
    res.failed_stage = "config";
    res.message = e.what();
    return res;
  }
  rep["config"] = config_json(cfg);
  std::string stage;
  auto fail = [&](const std::string& why) {
    res.exit_code = kExitStage;
    res.failed_stage = stage;
    res.message = why;
    rep["failed_stage"] = stage;
    rep["message"] = why;
    rep["pass"] = false;
  };

  State s0;
  try {
    s0 = load_initial_state(cfg.ics);
  } catch (const Error& e) {
    res.exit_code = kExitInvalid;
    res.failed_stage = "ics";
    res.message = e.what();
    return res;
  }

  try {
    stage = "length";
    const LengthResult len = euler_length();
    rep["length"] = {{"ell0", len.ell0}, {"pi_over_ell0", kPi / len.ell0}, {"intervals", len.samples},
                     {"estimated_error", len.estimated_error}, {"gate", length_gate(len.ell0)}};
    if (!length_gate(len.ell0)) {
      fail("equipotential length is not below pi/5");
      return res;
    }

    stage = "bounds";
    const BoundsReport b = bounds_report(len.ell0, cfg.period);
    rep["bounds"] = {{"T", b.T}, {"A2", b.A2}, {"A3", b.A3}, {"a", b.a}, {"I0_star", b.I0_star}, {"gate", b.gate_passed}};
    if (!b.gate_passed) {
      fail("test action is not below the collision bound");
      return res;
    }

    stage = "minimize";
    static const EquipotentialArc arc;
    const DiscretePath seed = reduced_test_path(b.I0_star, cfg.period, cfg.segments, arc);
    MinimizeOptions mo;
    mo.tol = cfg.minimize_tol;
    mo.max_iter = cfg.max_iter;
    const MinimizeReport mr = minimize(seed, mo);
    rep["minimize"] = {{"segments", cfg.segments},         {"action", mr.action},
                       {"gradient_norm", mr.gradient_norm}, {"iterations", mr.iterations},
                       {"converged", mr.converged},         {"min_separation", mr.min_separation},
                       {"max_angular_momentum", mr.max_angular_momentum}};
    if (!mr.converged) {
      fail("minimizer did not reach the gradient tolerance");
      return res;
    }
    if (!(mr.action < b.a)) {
      fail("minimum action is not below the test action");
      return res;
    }

    stage = "build";
    const Orbit orbit = build_orbit(mr.path);
    double jmax = 0.0;
    for (double j : orbit.junction_mismatch) jmax = std::max(jmax, j);
    rep["build"] = {{"Tbar", orbit.Tbar}, {"nodes", orbit.nodes.size()}, {"junction_mismatch_max", jmax},
                    {"choreography_residual", choreography_residual(orbit)}};

    stage = "integrate";
    const double Tbar = cfg.orbit_period;
    const Trajectory tr = integrate(s0, Tbar, cfg.integrate_tol, cfg.csv_samples);
    const Invariants iv0 = invariants(s0);
    const double defect = periodicity_defect(tr.final_state(), s0);
    const Variation var = relative_variation(tr.states);
    rep["integrate"] = {{"Tbar", Tbar},
                        {"I0", iv0.I},
                        {"H0", iv0.H},
                        {"C0", iv0.C},
                        {"periodicity_defect", defect},
                        {"energy_drift", tr.energy_drift()},
                        {"angular_momentum_drift", tr.angular_momentum_drift()},
                        {"momentum_drift", tr.momentum_drift()},
                        {"steps", tr.stats.steps},
                        {"rejected", tr.stats.rejected},
                        {"order", tr.stats.order},
                        {"relative_variation_I", var.I},
                        {"relative_variation_U", var.U}};
    const MonodromyResult mono = monodromy(s0, Tbar, cfg.integrate_tol);
    json eig = json::array();
    for (const auto& z : mono.eigenvalues) eig.push_back({z.real(), z.imag()});
    rep["monodromy"] = {{"determinant", mono.determinant()},
                        {"max_modulus_deviation", mono.max_modulus_deviation()},
                        {"unit_eigenvalues", mono.unit_count(1e-5)},
                        {"eigenvalues", eig}};
    const PeriodRefinement pr = refine_period(s0, Tbar, cfg.integrate_tol);
    rep["refine_period"] = {{"period", pr.period}, {"defect", pr.defect}, {"guess_defect", pr.guess_defect}};

    stage = "verify";
    VerificationReport v;
    v.add("periodicity_defect", defect, 1e-5, defect < 1e-5);
    v.add("energy_drift", tr.energy_drift(), 1e-9, tr.energy_drift() < 1e-9);
    v.add("angular_momentum_drift", tr.angular_momentum_drift(), 1e-9, tr.angular_momentum_drift() < 1e-9);
    v.add("minimizer_angular_momentum", mr.max_angular_momentum, 1e-6, mr.max_angular_momentum < 1e-6);
    v.add("minimizer_min_separation", mr.min_separation, 0.1, mr.min_separation > 0.1);
    v.add("monodromy_determinant", std::abs(mono.determinant() - 1.0), 1e-6, std::abs(mono.determinant() - 1.0) < 1e-6);
    v.add("monodromy_moduli", mono.max_modulus_deviation(), 1e-3, mono.max_modulus_deviation() < 1e-3);
    v.append(verify_orbit(orbit, len.ell0, cfg.rel_tol), "minimizer.");
    v.append(verify_trajectory(tr, len.ell0, Tbar, cfg.rel_tol), "integrated.");
    const double ev = euler_velocity_constraint(tr.state_at(Tbar / 6.0));
    v.add("integrated.euler_velocity", ev, 1e-6, ev < 1e-6);
    const CrossValidation cv = cross_validate(orbit, tr, Tbar);
    v.add("cross_validation_hausdorff", cv.hausdorff, 1e-3, cv.hausdorff < 1e-3);
    rep["verification"] = to_json(v);
    rep["pass"] = v.pass();
    if (!v.pass()) {
      res.exit_code = kExitVerifyFail;
      res.failed_stage = "verify";
      for (const Check& c : v.checks)
        if (!c.pass) {
          res.message = "check failed: " + c.name;
          break;
        }
    }

    if (!cfg.out_dir.empty()) {
      stage = "write";
      namespace fs = std::filesystem;
      fs::create_directories(cfg.out_dir);
      const fs::path dir(cfg.out_dir);
      std::ostringstream csv;
      write_trajectory_csv(csv, tr);
      write_text_file((dir / "trajectory.csv").string(), csv.str());
      write_text_file((dir / "path.json").string(), to_json(mr.path).dump() + "\n");
      write_text_file((dir / "orbit.json").string(), to_json(orbit).dump() + "\n");
      write_text_file((dir / "eight.svg").string(), orbit_svg(orbit));
      write_text_file((dir / "report.json").string(), rep.dump(2) + "\n");
    }
  } catch (const std::exception& e) {
    fail(e.what());
  }
  return res;
}

}  // namespace eight
