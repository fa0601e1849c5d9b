#pragma once

// File formats: trajectory CSV (17 columns, 17 significant digits), path,
// orbit and state JSON, verification reports, SVG plots of the orbit.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "eight/configuration.hpp"
#include "eight/errors.hpp"
#include "eight/integrator.hpp"
#include "eight/orbit.hpp"
#include "eight/path.hpp"
#include "eight/shape.hpp"
#include "eight/verification.hpp"

namespace eight {

using json = nlohmann::json;

class IoError : public Error {
 public:
  using Error::Error;
};

inline std::string format17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline constexpr const char* kCsvHeader = "t,x1_re,x1_im,x2_re,x2_im,x3_re,x3_im,v1_re,v1_im,v2_re,v2_im,v3_re,v3_im,I,U,H,C";

struct SampledTrajectory {
  std::vector<double> t;
  std::vector<State> states;
};

inline void write_trajectory_csv(std::ostream& os, const std::vector<double>& t, const std::vector<State>& states) {
  if (t.size() != states.size()) throw DomainError("write_trajectory_csv: size mismatch");
  os << kCsvHeader << '\n';
  for (std::size_t k = 0; k < t.size(); ++k) {
    const State& s = states[k];
    const Invariants iv = invariants(s);
    os << format17(t[k]);
    for (const Configuration* c : {&s.q, &s.v})
      for (std::size_t i = 0; i < 3; ++i) os << ',' << format17((*c)[i].x) << ',' << format17((*c)[i].y);
    os << ',' << format17(iv.I) << ',' << format17(iv.U) << ',' << format17(iv.H) << ',' << format17(iv.C) << '\n';
  }
}
inline void write_trajectory_csv(std::ostream& os, const Trajectory& tr) { write_trajectory_csv(os, tr.t_grid, tr.states); }

inline SampledTrajectory read_trajectory_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kCsvHeader) throw IoError("trajectory CSV: missing or unexpected header");
  SampledTrajectory r;
  std::size_t row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty()) continue;
    std::vector<double> v;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      // strtod, not stod: subnormals are valid values here
      char* end = nullptr;
      const double x = std::strtod(cell.c_str(), &end);
      if (cell.empty() || end != cell.c_str() + cell.size() || !std::isfinite(x))
        throw IoError("trajectory CSV: bad number on row " + std::to_string(row));
      v.push_back(x);
    }
    if (v.size() != 17) throw IoError("trajectory CSV: row " + std::to_string(row) + " has " + std::to_string(v.size()) + " columns");
    State s;
    for (std::size_t i = 0; i < 3; ++i) {
      s.q[i] = {v[1 + 2 * i], v[2 + 2 * i]};
      s.v[i] = {v[7 + 2 * i], v[8 + 2 * i]};
    }
    if (!r.t.empty() && !(v[0] > r.t.back())) throw IoError("trajectory CSV: times must increase");
    r.t.push_back(v[0]);
    r.states.push_back(s);
  }
  if (r.t.size() < 2) throw IoError("trajectory CSV: need at least two rows");
  return r;
}

/// Rebuilds a dense trajectory from samples (quintic Hermite through the
/// rows, accelerations recomputed from positions).
inline Trajectory trajectory_from_samples(const SampledTrajectory& s) {
  Trajectory tr;
  tr.t_grid = s.t;
  tr.states = s.states;
  for (std::size_t k = 0; k < s.t.size(); ++k) {
    tr.invariants_log.push_back(invariants(s.states[k]));
    tr.record_step(s.t[k], s.states[k]);
  }
  return tr;
}

inline json to_json(const Vec2& v) { return json::array({v.x, v.y}); }
inline json to_json(const Configuration& c) { return json::array({to_json(c[0]), to_json(c[1]), to_json(c[2])}); }

inline Vec2 vec2_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) throw IoError("expected [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}
inline Configuration configuration_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) throw IoError("expected three bodies");
  Configuration c;
  for (std::size_t i = 0; i < 3; ++i) c[i] = vec2_from_json(j[i]);
  return c;
}

inline json to_json(const State& s) { return {{"q", to_json(s.q)}, {"v", to_json(s.v)}}; }
inline State state_from_json(const json& j) {
  if (!j.is_object() || !j.contains("q") || !j.contains("v")) throw IoError("state: need \"q\" and \"v\"");
  return {configuration_from_json(j["q"]), configuration_from_json(j["v"])};
}

inline json to_json(const DiscretePath& p) {
  json nodes = json::array();
  for (const Configuration& c : p.nodes) nodes.push_back(to_json(c));
  return {{"kind", "path"}, {"T", p.T}, {"nodes", nodes}};
}
inline DiscretePath path_from_json(const json& j) {
  if (!j.is_object() || j.value("kind", "") != "path") throw IoError("not a path file");
  DiscretePath p;
  p.T = j.at("T").get<double>();
  for (const json& c : j.at("nodes")) p.nodes.push_back(configuration_from_json(c));
  return p;
}

inline json to_json(const Orbit& o) {
  json nodes = json::array();
  for (const Configuration& c : o.nodes) nodes.push_back(to_json(c));
  return {{"kind", "orbit"},
          {"Tbar", o.Tbar},
          {"arc_segments", o.arc_segments},
          {"junction_mismatch", o.junction_mismatch},
          {"nodes", nodes}};
}
inline Orbit orbit_from_json(const json& j) {
  if (!j.is_object() || j.value("kind", "") != "orbit") throw IoError("not an orbit file");
  Orbit o;
  o.Tbar = j.at("Tbar").get<double>();
  o.arc_segments = j.at("arc_segments").get<std::size_t>();
  for (const json& c : j.at("nodes")) o.nodes.push_back(configuration_from_json(c));
  if (j.contains("junction_mismatch")) o.junction_mismatch = j["junction_mismatch"].get<std::vector<double>>();
  if (o.arc_segments == 0 || o.nodes.size() != 12 * o.arc_segments) throw IoError("orbit: node count is not 12n");
  if (!(o.Tbar > 0.0)) throw IoError("orbit: period must be positive");
  return o;
}

/// The first twelfth of an orbit as a discrete path.
inline DiscretePath twelfth_arc(const Orbit& o) {
  DiscretePath p;
  p.T = o.T();
  p.nodes.assign(o.nodes.begin(), o.nodes.begin() + static_cast<std::ptrdiff_t>(o.arc_segments + 1));
  return p;
}

inline json to_json(const VerificationReport& r) {
  json checks = json::array();
  for (const Check& c : r.checks) {
    json e = {{"name", c.name}, {"value", c.value}, {"bound", c.bound}, {"pass", c.pass}};
    if (!c.detail.empty()) e["detail"] = c.detail;
    checks.push_back(e);
  }
  return {{"pass", r.pass()}, {"checks", checks}};
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw IoError(path + ": " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  if (!out) throw IoError("write failed: " + path);
}

/// Orbit samples at m uniform times: t, q, and the shape angles (θ, φ).
inline json orbit_samples_json(const Orbit& o, std::size_t m) {
  json rows = json::array();
  for (std::size_t k = 0; k < m; ++k) {
    const double t = o.Tbar * static_cast<double>(k) / static_cast<double>(m);
    const Configuration x = o.at(t);
    const SphericalShape s = to_spherical(shape_of(x));
    rows.push_back({{"t", t}, {"q", to_json(x[2])}, {"theta", s.theta}, {"phi", s.phi}});
  }
  return {{"kind", "samples"}, {"Tbar", o.Tbar}, {"samples", rows}};
}

inline void write_orbit_samples_csv(std::ostream& os, const Orbit& o, std::size_t m) {
  os << "t,q_re,q_im,theta,phi\n";
  for (std::size_t k = 0; k < m; ++k) {
    const double t = o.Tbar * static_cast<double>(k) / static_cast<double>(m);
    const Configuration x = o.at(t);
    const SphericalShape s = to_spherical(shape_of(x));
    os << format17(t) << ',' << format17(x[2].x) << ',' << format17(x[2].y) << ',' << format17(s.theta) << ','
       << format17(s.phi) << '\n';
  }
}

/// Two panels: the planar curve q, and the shape curve in (θ, φ) on the
/// node grid, split where θ wraps.
inline std::string orbit_svg(const Orbit& o, std::size_t m = 2000) {
  std::ostringstream os;
  os << std::setprecision(6);
  const double W = 420, H = 300, pad = 20;
  double R = 0.0;
  std::vector<Vec2> q(m);
  for (std::size_t k = 0; k < m; ++k) {
    q[k] = o.q_at(o.Tbar * static_cast<double>(k) / static_cast<double>(m));
    R = std::max({R, std::abs(q[k].x), std::abs(q[k].y)});
  }
  const double sc = (W / 2 - pad) / R;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << 2 * W << "\" height=\"" << H << "\">\n";
  os << "<g id=\"plane\"><polygon fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" points=\"";
  for (const Vec2& p : q) os << W / 2 + sc * p.x << ',' << H / 2 - sc * p.y << ' ';
  os << "\"/></g>\n";
  auto px = [&](double theta) { return W + pad + (W - 2 * pad) * theta / (2 * kPi); };
  auto py = [&](double phi) { return H / 2 - (H / 2 - pad) * phi / (kPi / 2); };
  os << "<g id=\"shape\"><line x1=\"" << px(0) << "\" y1=\"" << py(0) << "\" x2=\"" << px(2 * kPi) << "\" y2=\"" << py(0)
     << "\" stroke=\"gray\"/>\n<polyline fill=\"none\" stroke=\"black\" points=\"";
  double prev = -1.0;
  for (std::size_t k = 0; k <= o.nodes.size(); ++k) {
    const SphericalShape s = to_spherical(shape_of(o.nodes[k % o.nodes.size()]));
    if (prev >= 0.0 && std::abs(s.theta - prev) > kPi) os << "\"/>\n<polyline fill=\"none\" stroke=\"black\" points=\"";
    os << px(s.theta) << ',' << py(s.phi) << ' ';
    prev = s.theta;
  }
  os << "\"/></g>\n</svg>\n";
  return os.str();
}

}  // namespace eight
