#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "eight/equipotential.hpp"
#include "eight/io.hpp"
#include "eight/pipeline.hpp"

using namespace eight;

namespace {

const Orbit& orbit() {
  static const Orbit o = [] {
    const double ell0 = euler_length().ell0;
    const DiscretePath seed = reduced_test_path(optimal_test_action(ell0, kTwelfth).I0_star, kTwelfth, 64);
    return build_orbit(minimize(seed, 1e-10, 100000).path);
  }();
  return o;
}

std::vector<std::string> split(const std::string& s, char c) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string x;
  while (std::getline(ss, x, c)) out.push_back(x);
  return out;
}

}  // namespace

TEST(Format17, RoundTripsDoubles) {
  for (double v : {0.1, 1.0 / 3.0, -2.0359763202908705, 6.32591398, 1e-300, 5e-324, 0.0}) {
    EXPECT_EQ(std::strtod(format17(v).c_str(), nullptr), v);
  }
}

TEST(TrajectoryCsv, ColumnsAndHeader) {
  const Trajectory tr = integrate(simo_initial_state(), 1.0, 1e-10, 5);
  std::ostringstream os;
  write_trajectory_csv(os, tr);
  const std::vector<std::string> lines = split(os.str(), '\n');
  ASSERT_EQ(lines.size(), 6u);
  EXPECT_EQ(lines[0], kCsvHeader);
  for (std::size_t k = 1; k < lines.size(); ++k) EXPECT_EQ(split(lines[k], ',').size(), 17u);
  // I, U, H, C columns agree with the state
  const std::vector<std::string> row = split(lines[3], ',');
  const Invariants iv = invariants(tr.states[2]);
  EXPECT_EQ(std::stod(row[13]), iv.I);
  EXPECT_EQ(std::stod(row[14]), iv.U);
  EXPECT_EQ(std::stod(row[15]), iv.H);
  EXPECT_EQ(std::stod(row[16]), iv.C);
}

TEST(TrajectoryCsv, LosslessRoundTrip) {
  const Trajectory tr = integrate(simo_initial_state(), kSimoPeriod, 1e-12, 101);
  std::stringstream ss;
  write_trajectory_csv(ss, tr);
  const SampledTrajectory back = read_trajectory_csv(ss);
  ASSERT_EQ(back.t.size(), tr.t_grid.size());
  for (std::size_t k = 0; k < back.t.size(); ++k) {
    EXPECT_EQ(back.t[k], tr.t_grid[k]);
    EXPECT_EQ(back.states[k], tr.states[k]);
  }
}

TEST(TrajectoryCsv, RejectsMalformedInput) {
  auto parse = [](const std::string& text) {
    std::istringstream is(text);
    return read_trajectory_csv(is);
  };
  const std::string h = std::string(kCsvHeader) + "\n";
  const std::string row0 = "0,1,0,-1,0,0,0,0,1,0,-1,0,0,2,1,0,0\n";
  const std::string row1 = "1,1,0,-1,0,0,0,0,1,0,-1,0,0,2,1,0,0\n";
  EXPECT_NO_THROW(parse(h + row0 + row1));
  EXPECT_THROW(parse(row0 + row1), IoError);
  EXPECT_THROW(parse(h + row0), IoError);
  EXPECT_THROW(parse(h + row0 + "1,2,3\n"), IoError);
  EXPECT_THROW(parse(h + row0 + "1,1,0,-1,0,0,0,0,1,0,-1,0,0,2,1,0,zz\n"), IoError);
  EXPECT_THROW(parse(h + row1 + row0), IoError);
  EXPECT_THROW(parse(h + row0 + "1,1,0,-1,0,0,0,0,1,0,-1,0,0,2,1,0,nan\n"), IoError);
  EXPECT_THROW(parse(h + row0 + "1,1,0,-1,0,0,0,0,1,0,-1,0,0,2,1,,0\n"), IoError);
  EXPECT_NO_THROW(parse(h + row0 + "1,5e-324,0,-1,0,0,0,0,1,0,-1,0,0,2,1,0,0\n"));
}

TEST(TrajectoryCsv, DenseRebuildMatchesIntegration) {
  const Trajectory tr = integrate(simo_initial_state(), kSimoPeriod, 1e-12, 2001);
  std::stringstream ss;
  write_trajectory_csv(ss, tr);
  const Trajectory re = trajectory_from_samples(read_trajectory_csv(ss));
  for (double t : {0.1234, 1.5, 3.33, 6.0}) {
    EXPECT_LT(max_abs_difference(re.state_at(t), tr.state_at(t)), 1e-9) << t;
  }
}

TEST(Json, StateRoundTrip) {
  const State s = simo_initial_state();
  EXPECT_EQ(state_from_json(json::parse(to_json(s).dump())), s);
  EXPECT_THROW(state_from_json(json::parse(R"({"q": [[0,0],[1,0]], "v": [[0,0],[0,0],[0,0]]})")), IoError);
  EXPECT_THROW(state_from_json(json::parse(R"({"q": [[0,0],[1,0],[2,0]]})")), IoError);
  EXPECT_THROW(state_from_json(json::parse(R"({"q": [[0,"a"],[1,0],[2,0]], "v": [[0,0],[0,0],[0,0]]})")), IoError);
}

TEST(Json, PathAndOrbitRoundTrip) {
  const Orbit& o = orbit();
  const Orbit back = orbit_from_json(json::parse(to_json(o).dump()));
  EXPECT_EQ(back.Tbar, o.Tbar);
  EXPECT_EQ(back.arc_segments, o.arc_segments);
  ASSERT_EQ(back.nodes.size(), o.nodes.size());
  for (std::size_t k = 0; k < o.nodes.size(); ++k) EXPECT_EQ(back.nodes[k], o.nodes[k]);
  EXPECT_EQ(back.junction_mismatch, o.junction_mismatch);

  const DiscretePath arc = twelfth_arc(o);
  const DiscretePath pb = path_from_json(json::parse(to_json(arc).dump()));
  EXPECT_EQ(pb.T, arc.T);
  EXPECT_EQ(pb.nodes, arc.nodes);
  EXPECT_THROW(path_from_json(to_json(o)), IoError);
  EXPECT_THROW(orbit_from_json(to_json(arc)), IoError);
}

TEST(Json, OrbitNodeCountChecked) {
  json j = to_json(orbit());
  j["nodes"].erase(j["nodes"].begin());
  EXPECT_THROW(orbit_from_json(j), IoError);
}

TEST(TwelfthArc, RecoversTheMinimizerWindow) {
  const DiscretePath arc = twelfth_arc(orbit());
  EXPECT_EQ(arc.segments(), orbit().arc_segments);
  EXPECT_NEAR(arc.T, kTwelfth * 12.0 / 12.0, 1e-15);
  EXPECT_TRUE(starts_on_e3(arc));
  EXPECT_TRUE(ends_on_m1(arc));
}

TEST(Report, JsonCarriesChecks) {
  VerificationReport r;
  r.add("a", 1.0, 2.0, true);
  r.add("b", 3.0, 2.0, false, "t = 1");
  const json j = to_json(r);
  EXPECT_FALSE(j["pass"].get<bool>());
  ASSERT_EQ(j["checks"].size(), 2u);
  EXPECT_EQ(j["checks"][1]["detail"], "t = 1");
  EXPECT_FALSE(j["checks"][0].contains("detail"));
}

TEST(Export, SvgHasBothPanels) {
  const std::string svg = orbit_svg(orbit(), 400);
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("id=\"plane\""), std::string::npos);
  EXPECT_NE(svg.find("id=\"shape\""), std::string::npos);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
}

TEST(Export, PlaneCurveHasKleinSymmetry) {
  // the sampled eight is invariant under x- and y-negation as a set
  const json j = orbit_samples_json(orbit(), 600);
  std::vector<Vec2> q;
  for (const json& r : j["samples"]) q.push_back(vec2_from_json(r["q"]));
  std::vector<Vec2> fx, fy;
  for (const Vec2& p : q) fx.push_back({-p.x, p.y}), fy.push_back({p.x, -p.y});
  EXPECT_LT(hausdorff_distance(q, fx), 1e-12);
  EXPECT_LT(hausdorff_distance(q, fy), 1e-12);
}

TEST(Export, ShapeCurveCrossesEquatorAtEulerLongitudes) {
  const Orbit& o = orbit();
  const std::size_t N = o.nodes.size(), step = 2 * o.arc_segments;
  std::vector<double> lon;
  for (std::size_t k = 0; k < N; ++k) {
    const double a = shape_of(o.nodes[k]).u3, b = shape_of(o.nodes[(k + 1) % N]).u3;
    const bool on = std::abs(a) < 1e-12 * shape_of(o.nodes[k]).norm();
    if (on) {
      EXPECT_EQ(k % step, 0u) << k;
      lon.push_back(to_spherical(shape_of(o.nodes[k])).theta);
    } else if (std::abs(b) >= 1e-12 * shape_of(o.nodes[(k + 1) % N]).norm()) {
      EXPECT_GT(a * b, 0.0) << "sign change between nodes " << k << " and " << k + 1;
    }
  }
  ASSERT_EQ(lon.size(), 6u);
  for (double t : lon) {
    const double d = std::remainder(t, 2.0 * kPi / 3.0);
    EXPECT_NEAR(d, 0.0, 1e-9) << t;
  }
}

TEST(Export, SamplesCsv) {
  std::ostringstream os;
  write_orbit_samples_csv(os, orbit(), 10);
  const std::vector<std::string> lines = split(os.str(), '\n');
  ASSERT_EQ(lines.size(), 11u);
  EXPECT_EQ(lines[0], "t,q_re,q_im,theta,phi");
  EXPECT_EQ(split(lines[5], ',').size(), 5u);
}

TEST(Files, MissingAndUnwritable) {
  EXPECT_THROW(read_json_file("/nonexistent/x.json"), IoError);
  EXPECT_THROW(write_text_file("/nonexistent/dir/x.txt", "x"), IoError);
  const auto p = std::filesystem::temp_directory_path() / "eight_bad.json";
  write_text_file(p.string(), "{not json");
  EXPECT_THROW(read_json_file(p.string()), IoError);
  std::filesystem::remove(p);
}
