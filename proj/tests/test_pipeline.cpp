#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sys/wait.h>

#include "eight/pipeline.hpp"

using namespace eight;
namespace fs = std::filesystem;

namespace {

RunConfig small() {
  RunConfig c;
  c.segments = 128;
  c.csv_samples = 241;
  // at n = 128 the O(h^2) gap between mean U and -2H is ~6e-6
  c.rel_tol = 3e-5;
  return c;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("eight_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

#ifdef EIGHT_CLI
int cli(const std::string& args) {
  const int st = std::system((std::string(EIGHT_CLI) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}
#endif

}  // namespace

TEST(RunConfig, Validation) {
  EXPECT_NO_THROW(RunConfig{}.validate());
  RunConfig c;
  c.period = 0.0;
  EXPECT_THROW(c.validate(), DomainError);
  c = {};
  c.integrate_tol = std::nan("");
  EXPECT_THROW(c.validate(), DomainError);
  c = {};
  c.segments = 1;
  EXPECT_THROW(c.validate(), DomainError);
  c = {};
  c.csv_samples = 1;
  EXPECT_THROW(c.validate(), DomainError);
}

TEST(Pipeline, InvalidConfigExitsTwo) {
  RunConfig c = small();
  c.period = -1.0;
  const PipelineResult r = run_pipeline(c);
  EXPECT_EQ(r.exit_code, kExitInvalid);
  EXPECT_EQ(r.failed_stage, "config");
}

TEST(Pipeline, CollisionInitialStateExitsTwo) {
  const fs::path dir = scratch("collision");
  State s = simo_initial_state();
  s.q[1] = s.q[0];
  write_text_file((dir / "ics.json").string(), to_json(s).dump());
  RunConfig c = small();
  c.ics = (dir / "ics.json").string();
  const PipelineResult r = run_pipeline(c);
  EXPECT_EQ(r.exit_code, kExitInvalid);
  EXPECT_EQ(r.failed_stage, "ics");
  EXPECT_THROW(load_initial_state(c.ics), CollisionError);
  fs::remove_all(dir);
}

TEST(Pipeline, MissingInitialStateFileExitsTwo) {
  RunConfig c = small();
  c.ics = "/nonexistent/ics.json";
  EXPECT_EQ(run_pipeline(c).exit_code, kExitInvalid);
}

TEST(Pipeline, UnconvergedMinimizerIsAStageFailure) {
  RunConfig c = small();
  c.max_iter = 3;
  const PipelineResult r = run_pipeline(c);
  EXPECT_EQ(r.exit_code, kExitStage);
  EXPECT_EQ(r.failed_stage, "minimize");
  EXPECT_FALSE(r.report["pass"].get<bool>());
}

TEST(Pipeline, DefaultRunPassesAndWritesArtifacts) {
  const fs::path dir = scratch("run");
  RunConfig c = small();
  c.out_dir = dir.string();
  const PipelineResult r = run_pipeline(c);
  ASSERT_EQ(r.exit_code, kExitPass) << r.failed_stage << ": " << r.message;
  EXPECT_TRUE(r.report["pass"].get<bool>());
  for (const char* f : {"trajectory.csv", "path.json", "orbit.json", "eight.svg", "report.json"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;

  // artifacts read back
  std::ifstream csv(dir / "trajectory.csv");
  EXPECT_EQ(read_trajectory_csv(csv).t.size(), c.csv_samples);
  const Orbit o = orbit_from_json(read_json_file((dir / "orbit.json").string()));
  EXPECT_EQ(o.arc_segments, c.segments);
  EXPECT_TRUE(verify_orbit(o, r.report["length"]["ell0"].get<double>(), c.rel_tol).pass());
  EXPECT_EQ(read_json_file((dir / "report.json").string()), r.report);
  fs::remove_all(dir);
}

TEST(Pipeline, ReportIsDeterministic) {
  const PipelineResult a = run_pipeline(small());
  const PipelineResult b = run_pipeline(small());
  EXPECT_EQ(a.report.dump(2), b.report.dump(2));
}

TEST(Pipeline, TightToleranceFailsVerification) {
  RunConfig c = small();
  c.rel_tol = 1e-9;
  const PipelineResult r = run_pipeline(c);
  EXPECT_EQ(r.exit_code, kExitVerifyFail);
  EXPECT_NE(r.message.find("mean_U_equals_minus_2H"), std::string::npos) << r.message;
}

#ifdef EIGHT_CLI
TEST(Cli, ExitCodes) {
  const fs::path dir = scratch("cli");
  const std::string d = dir.string();
  EXPECT_EQ(cli("length"), 0);
  EXPECT_EQ(cli("bounds --period 0"), 2);
  EXPECT_EQ(cli("bounds --ell0 nope"), 2);
  EXPECT_EQ(cli("no-such-command"), 2);
  EXPECT_EQ(cli("run --period 0"), 2);

  State s = simo_initial_state();
  s.q[2] = s.q[0];
  write_text_file(d + "/bad.json", to_json(s).dump());
  EXPECT_EQ(cli("integrate --ics " + d + "/bad.json --t-end 1"), 2);
  EXPECT_EQ(cli("verify --in " + d + "/missing.csv"), 2);

  EXPECT_EQ(cli("minimize --segments 128 --out " + d + "/path.json"), 0);
  EXPECT_EQ(cli("build --in " + d + "/path.json --out " + d + "/orbit.json"), 0);
  EXPECT_EQ(cli("export --in " + d + "/orbit.json --format svg --out " + d + "/e.svg"), 0);
  EXPECT_TRUE(fs::exists(dir / "e.svg"));
  // the n = 128 arc misses the default relative tolerance on mean U = -2H
  EXPECT_EQ(cli("verify --in " + d + "/orbit.json --report " + d + "/r.json"), 1);

  EXPECT_EQ(cli("integrate --t-end 6.32591398 --samples 4321 --out " + d + "/traj.csv"), 0);
  EXPECT_EQ(cli("verify --in " + d + "/traj.csv --report " + d + "/r2.json"), 0);
  EXPECT_TRUE(read_json_file(d + "/r2.json")["pass"].get<bool>());

  write_text_file(d + "/cfg.ini", "[run]\nsegments = 128\nrel-tol = 3e-5\nsamples = 241\n");
  EXPECT_EQ(cli("--config " + d + "/cfg.ini run --report " + d + "/r3.json"), 0);
  EXPECT_EQ(read_json_file(d + "/r3.json")["config"]["segments"], 128);
  fs::remove_all(dir);
}
#endif
