// eight: command-line driver for the figure-eight pipeline.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "eight/eight.hpp"

using namespace eight;

namespace {

double parse_ell0(const std::string& s) {
  if (s == "auto") return euler_length().ell0;
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() || !(v > 0.0)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DomainError("--ell0 must be a positive number or 'auto'");
  }
}

void emit(const json& j, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << j.dump(2) << '\n';
  } else {
    write_text_file(path, j.dump(2) + "\n");
  }
}

bool ends_with(const std::string& s, const std::string& tail) {
  return s.size() >= tail.size() && s.compare(s.size() - tail.size(), tail.size(), tail) == 0;
}

int report_exit(const VerificationReport& v, const std::string& report_path, json extra = json::object()) {
  json j = to_json(v);
  for (auto it = extra.begin(); it != extra.end(); ++it) j[it.key()] = it.value();
  emit(j, report_path);
  if (!v.pass()) {
    for (const Check& c : v.checks)
      if (!c.pass) std::cerr << "eight: check failed: " << c.name << " (" << format17(c.value) << ")\n";
    return kExitVerifyFail;
  }
  return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Figure-eight three-body orbit: existence pipeline and checks"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key = value file overriding defaults");

  // length
  auto* length = app.add_subcommand("length", "arc length of the Euler equipotential twelfth");
  std::size_t n_base = 64, refinements = 14;
  length->add_option("--n-base", n_base, "starting trapezoid intervals")->capture_default_str();
  length->add_option("--refinements", refinements, "maximum doublings")->capture_default_str();

  // bounds
  auto* bounds = app.add_subcommand("bounds", "collision bounds and the test action");
  double period = kTwelfth;
  std::string ell0_arg = "auto";
  bounds->add_option("--period", period, "time T from E3 to M1")->capture_default_str();
  bounds->add_option("--ell0", ell0_arg, "equipotential length, or 'auto'")->capture_default_str();

  // minimize
  auto* mini = app.add_subcommand("minimize", "minimize the action from the equipotential seed");
  std::size_t segments = 512, max_iter = 100000;
  double min_tol = 1e-10;
  std::string out;
  mini->add_option("--period", period)->capture_default_str();
  mini->add_option("--segments", segments)->capture_default_str();
  mini->add_option("--tol", min_tol, "gradient tolerance")->capture_default_str();
  mini->add_option("--max-iter", max_iter)->capture_default_str();
  mini->add_option("--out", out, "path JSON");

  // build
  auto* build = app.add_subcommand("build", "assemble the full orbit from a minimizing arc");
  std::string in;
  build->add_option("--in", in, "path JSON")->required();
  build->add_option("--out", out, "orbit JSON");

  // integrate
  auto* integ = app.add_subcommand("integrate", "integrate Newton's equations");
  std::string ics = "simo";
  double t_end = kSimoPeriod, int_tol = 1e-12;
  std::size_t samples = 2001;
  integ->add_option("--ics", ics, "'simo' or a state JSON file")->capture_default_str();
  integ->add_option("--t-end", t_end)->capture_default_str();
  integ->add_option("--tol", int_tol)->capture_default_str();
  integ->add_option("--samples", samples)->capture_default_str();
  integ->add_option("--out", out, "CSV output (stdout if omitted)");

  // verify
  auto* verify = app.add_subcommand("verify", "run the checks on a trajectory CSV or an orbit JSON");
  std::string report_path;
  double verify_period = 0.0;
  verify->add_option("--in", in, "trajectory CSV or orbit JSON")->required();
  verify->add_option("--ell0", ell0_arg)->capture_default_str();
  verify->add_option("--period", verify_period, "orbit period of a CSV (default: last time)");
  verify->add_option("--report", report_path, "report JSON (stdout if omitted)");

  // run
  auto* run = app.add_subcommand("run", "full pipeline with a combined report");
  RunConfig cfg;
  run->add_option("--period", cfg.period)->capture_default_str();
  run->add_option("--segments", cfg.segments)->capture_default_str();
  run->add_option("--minimize-tol", cfg.minimize_tol)->capture_default_str();
  run->add_option("--max-iter", cfg.max_iter)->capture_default_str();
  run->add_option("--integrate-tol", cfg.integrate_tol)->capture_default_str();
  run->add_option("--ics", cfg.ics)->capture_default_str();
  run->add_option("--orbit-period", cfg.orbit_period)->capture_default_str();
  run->add_option("--samples", cfg.csv_samples)->capture_default_str();
  run->add_option("--rel-tol", cfg.rel_tol)->capture_default_str();
  run->add_option("--out-dir", cfg.out_dir, "artifact directory");
  run->add_option("--report", report_path, "report JSON (stdout if omitted)");

  // export
  auto* exp = app.add_subcommand("export", "dump orbit samples or an SVG");
  std::string format = "svg";
  std::size_t export_samples = 2000;
  exp->add_option("--in", in, "orbit JSON")->required();
  exp->add_option("--format", format)->check(CLI::IsMember({"csv", "json", "svg"}))->capture_default_str();
  exp->add_option("--samples", export_samples)->capture_default_str();
  exp->add_option("--out", out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalid;
  }

  try {
    if (*length) {
      const LengthResult r = euler_length(n_base, refinements);
      emit({{"ell0", r.ell0},
            {"pi_over_ell0", kPi / r.ell0},
            {"intervals", r.samples},
            {"estimated_error", r.estimated_error},
            {"gate", length_gate(r.ell0)}},
           "");
      return kExitPass;
    }
    if (*bounds) {
      const BoundsReport b = bounds_report(parse_ell0(ell0_arg), period);
      emit({{"T", b.T}, {"ell0", b.ell0}, {"A2", b.A2}, {"A3", b.A3}, {"a", b.a}, {"I0_star", b.I0_star},
            {"gate", b.gate_passed}},
           "");
      return kExitPass;
    }
    if (*mini) {
      const double ell0 = euler_length().ell0;
      const BoundsReport b = bounds_report(ell0, period);
      const DiscretePath seed = reduced_test_path(b.I0_star, period, segments);
      MinimizeOptions mo;
      mo.tol = min_tol;
      mo.max_iter = max_iter;
      const MinimizeReport r = minimize(seed, mo);
      if (!out.empty()) write_text_file(out, to_json(r.path).dump() + "\n");
      emit({{"action", r.action}, {"a", b.a}, {"A2", b.A2}, {"gradient_norm", r.gradient_norm},
            {"iterations", r.iterations}, {"converged", r.converged}, {"min_separation", r.min_separation},
            {"max_angular_momentum", r.max_angular_momentum}},
           "");
      if (!r.converged) {
        std::cerr << "eight: minimize: gradient tolerance not reached\n";
        return kExitStage;
      }
      return kExitPass;
    }
    if (*build) {
      const Orbit o = build_orbit(path_from_json(read_json_file(in)));
      if (!out.empty()) write_text_file(out, to_json(o).dump() + "\n");
      double jmax = 0.0;
      for (double j : o.junction_mismatch) jmax = std::max(jmax, j);
      emit({{"Tbar", o.Tbar}, {"nodes", o.nodes.size()}, {"junction_mismatch_max", jmax},
            {"choreography_residual", choreography_residual(o)}},
           "");
      return kExitPass;
    }
    if (*integ) {
      const Trajectory tr = integrate(load_initial_state(ics), t_end, int_tol, samples);
      if (out.empty()) {
        write_trajectory_csv(std::cout, tr);
      } else {
        std::ofstream f(out);
        if (!f) throw IoError("cannot write " + out);
        write_trajectory_csv(f, tr);
      }
      std::cerr << "steps " << tr.stats.steps << ", rejected " << tr.stats.rejected << ", defect "
                << format17(periodicity_defect(tr.final_state(), tr.initial())) << '\n';
      return kExitPass;
    }
    if (*verify) {
      const double ell0 = parse_ell0(ell0_arg);
      if (ends_with(in, ".csv")) {
        std::ifstream f(in);
        if (!f) throw IoError("cannot open " + in);
        const Trajectory tr = trajectory_from_samples(read_trajectory_csv(f));
        const double Tbar = verify_period > 0.0 ? verify_period : tr.t_end();
        if (Tbar > tr.t_end() + 1e-12) throw DomainError("--period exceeds the trajectory span");
        VerificationReport v = verify_trajectory(tr, ell0, Tbar);
        const double defect = periodicity_defect(tr.state_at(Tbar), tr.initial());
        v.add("periodicity_defect", defect, 1e-5, defect < 1e-5);
        return report_exit(v, report_path, {{"input", "trajectory"}, {"Tbar", Tbar}, {"ell0", ell0}});
      }
      const Orbit o = orbit_from_json(read_json_file(in));
      return report_exit(verify_orbit(o, ell0), report_path, {{"input", "orbit"}, {"Tbar", o.Tbar}, {"ell0", ell0}});
    }
    if (*run) {
      const PipelineResult r = run_pipeline(cfg);
      if (r.exit_code == kExitInvalid) {
        std::cerr << "eight: invalid input (" << r.failed_stage << "): " << r.message << '\n';
        return r.exit_code;
      }
      emit(r.report, report_path);
      if (r.exit_code != kExitPass) std::cerr << "eight: " << r.failed_stage << ": " << r.message << '\n';
      return r.exit_code;
    }
    if (*exp) {
      const Orbit o = orbit_from_json(read_json_file(in));
      if (format == "svg") {
        write_text_file(out, orbit_svg(o, export_samples));
      } else if (format == "json") {
        write_text_file(out, orbit_samples_json(o, export_samples).dump() + "\n");
      } else {
        std::ostringstream os;
        write_orbit_samples_csv(os, o, export_samples);
        write_text_file(out, os.str());
      }
      return kExitPass;
    }
  } catch (const DomainError& e) {
    std::cerr << "eight: invalid input: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const CollisionError& e) {
    std::cerr << "eight: invalid input: collision: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const IoError& e) {
    std::cerr << "eight: invalid input: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "eight: stage failure: " << e.what() << '\n';
    return kExitStage;
  }
  return kExitInvalid;
}
