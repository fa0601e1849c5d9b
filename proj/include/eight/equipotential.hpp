#pragma once

// The Euler equipotential curve √I·U = 5/√2 on the shape sphere, written as
// φ = φ(θ) over the arc E1 → C2 longitude (θ ∈ [0, π/3]), its length ℓ0 and
// the constant-speed test path that follows one twelfth of it.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "eight/configuration.hpp"
#include "eight/errors.hpp"
#include "eight/parallel.hpp"
#include "eight/path.hpp"
#include "eight/shape.hpp"

namespace eight {

inline constexpr double kEulerLevel = 5.0 / kSqrt2;  // Ũ at the Euler points

struct EquipotentialSample {
  double theta = 0.0;
  double phi = 0.0;
  double phi_prime = 0.0;
};

struct LengthResult {
  double ell0 = 0.0;
  std::size_t samples = 0;  ///< trapezoid intervals at the accepted level
  double estimated_error = 0.0;
};

/// F and its partial derivatives at one point.
struct ImplicitPartials {
  double F = 0.0;
  double F_theta = 0.0;
  double F_phi = 0.0;
  double F_theta_theta = 0.0;
  double F_phi_phi = 0.0;
};

inline ImplicitPartials implicit_partials(double theta, double phi) {
  ImplicitPartials d;
  const double cp = std::cos(phi), sp = std::sin(phi);
  for (int k = 0; k < 3; ++k) {
    const double a = theta + 2.0 * k * kPi / 3.0;
    const double ca = std::cos(a), sa = std::sin(a);
    const double g = 1.0 + cp * ca;
    if (!(g > 0.0)) throw DomainError("implicit_F: collision point on the level curve");
    const double r = 1.0 / std::sqrt(g);
    const double r3 = r * r * r, r5 = r3 * r * r;
    // g^{-1/2} − g0^{-1/2} with g − g0 in product form, g0 = 1 + cos(2kπ/3):
    // the three differences carry no cancellation against the level 5/√2.
    const double c0 = 2.0 * k * kPi / 3.0;
    const double g0 = (k == 0) ? 2.0 : 0.5;
    const double sh = std::sin(0.5 * phi);
    const double dg = -2.0 * sh * sh * ca - 2.0 * std::sin(c0 + 0.5 * theta) * std::sin(0.5 * theta);
    const double sg = std::sqrt(g), sg0 = std::sqrt(g0);
    d.F += -dg / (sg * sg0 * (sg + sg0));
    d.F_theta += 0.5 * cp * sa * r3;
    d.F_phi += 0.5 * sp * ca * r3;
    d.F_theta_theta += 0.5 * cp * ca * r3 + 0.75 * cp * cp * sa * sa * r5;
    d.F_phi_phi += 0.5 * cp * ca * r3 + 0.75 * sp * sp * ca * ca * r5;
  }
  return d;
}

/// Σ_k (1 + cosφ cos(θ + 2kπ/3))^{−1/2} − 5/√2. Throws DomainError at a collision.
inline double implicit_F(double theta, double phi) { return implicit_partials(theta, phi).F; }

/// Saddle endpoint θ = 0: φ = 0 and φ′(0) = √(−F_θθ/F_φφ).
inline EquipotentialSample solve_phi_at_euler() {
  const ImplicitPartials d = implicit_partials(0.0, 0.0);
  return {0.0, 0.0, std::sqrt(-d.F_theta_theta / d.F_phi_phi)};
}

/// Root φ ∈ (0, π/2) of F(θ, ·) for θ ∈ (0, π/3]. Newton from `seed`,
/// safeguarded by bisection on the sign bracket F(θ, 0) > 0 > F(θ, π/2).
inline EquipotentialSample solve_phi(double theta, double seed) {
  if (!(theta > 0.0) || theta > kPi / 3.0 + 1e-15) {
    throw DomainError("solve_phi: theta must lie in (0, pi/3]");
  }
  double lo = 0.0, hi = kPi / 2.0;
  double phi = (seed > lo && seed < hi) ? seed : 0.5 * (lo + hi);
  ImplicitPartials d;
  double best = phi, best_f = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 50; ++it) {
    d = implicit_partials(theta, phi);
    if (std::abs(d.F) < best_f) best = phi, best_f = std::abs(d.F);
    if (d.F > 0.0) lo = phi; else hi = phi;
    double next = (d.F_phi != 0.0) ? phi - d.F / d.F_phi : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::abs(next - phi);
    phi = next;
    // Rounding in F limits how small the Newton step gets near the saddle.
    if (step <= 1e-14 * phi || d.F == 0.0) break;
  }
  d = implicit_partials(theta, phi);
  if (std::abs(d.F) > best_f) d = implicit_partials(theta, phi = best);
  if (std::abs(d.F) < 1e-13) return {theta, phi, -d.F_theta / d.F_phi};
  throw ConvergenceError("solve_phi: Newton did not converge in 50 iterations", phi);
}

inline EquipotentialSample solve_phi(double theta) {
  const double slope = solve_phi_at_euler().phi_prime;
  return solve_phi(theta, std::min(slope * theta, 0.8));
}

/// Samples at θ_j = jπ/(3n), j = 0..n. Fixed chunks of the grid are solved by
/// continuation from their upper end downward, so the table is identical for
/// any thread count.
inline std::vector<EquipotentialSample> equipotential_table(std::size_t n) {
  if (n < 1) throw DomainError("equipotential_table: n must be positive");
  std::vector<EquipotentialSample> out(n + 1);
  out[0] = solve_phi_at_euler();
  const double slope = out[0].phi_prime;
  constexpr std::size_t kChunk = 512;
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  for_each_chunk(chunks, [&](std::size_t c) {
    const std::size_t first = c * kChunk + 1;
    const std::size_t last = std::min(n, (c + 1) * kChunk);
    double seed = std::min(slope * (static_cast<double>(last) * kPi / (3.0 * n)), 0.8);
    for (std::size_t j = last; j >= first; --j) {
      const double theta = (j == n) ? kPi / 3.0 : static_cast<double>(j) * kPi / (3.0 * n);
      out[j] = solve_phi(theta, seed);
      seed = out[j].phi;
    }
  });
  return out;
}

/// Arc-length density on the radius-1/2 sphere: ½√(cos²φ + φ′²).
inline double arc_density(const EquipotentialSample& s) {
  const double c = std::cos(s.phi);
  return 0.5 * std::sqrt(c * c + s.phi_prime * s.phi_prime);
}

namespace detail {

/// Neumaier-compensated sum in index order.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) comp_ += (sum_ - t) + x;
    else comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double trapezoid(const std::vector<double>& f, double h) {
  CompensatedSum s;
  for (std::size_t j = 0; j < f.size(); ++j) s.add((j == 0 || j + 1 == f.size()) ? 0.5 * f[j] : f[j]);
  return s.value() * h;
}

}  // namespace detail

/// Composite trapezoid value of ℓ0 with n intervals on [0, π/3].
inline double euler_length_trapezoid(std::size_t n) {
  const auto table = equipotential_table(n);
  std::vector<double> f(table.size());
  for (std::size_t j = 0; j < table.size(); ++j) f[j] = arc_density(table[j]);
  return detail::trapezoid(f, kPi / (3.0 * n));
}

/// ℓ0 by trapezoid refinement: n_base intervals, doubled up to `refinements`
/// times (and never beyond 2^20) until successive values differ by < 1e-12.
inline LengthResult euler_length(std::size_t n_base = 64, std::size_t refinements = 14) {
  if (n_base < 8) throw DomainError("euler_length: n_base must be at least 8");
  std::size_t n = n_base;
  double prev = euler_length_trapezoid(n);
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < refinements && 2 * n <= (std::size_t{1} << 20); ++r) {
    n *= 2;
    const double cur = euler_length_trapezoid(n);
    gap = std::abs(cur - prev);
    prev = cur;
    if (gap < 1e-12) return {cur, n, gap / 3.0};
  }
  throw ConvergenceError("euler_length: no 1e-12 Cauchy gap (last gap " + std::to_string(gap) + ")", prev);
}

/// ½∫ √(cos²φ + φ′²) dθ over [a, b] ⊂ [0, π/3] by the trapezoid rule with n intervals.
inline double arc_length_between(double a, double b, std::size_t n) {
  if (n < 1 || !(a >= 0.0) || !(b > a) || b > kPi / 3.0 + 1e-15) {
    throw DomainError("arc_length_between: need 0 <= a < b <= pi/3 and n >= 1");
  }
  const double slope = solve_phi_at_euler().phi_prime;
  std::vector<double> f(n + 1);
  double seed = std::min(slope * b, 0.8);
  for (std::size_t j = n + 1; j-- > 0;) {
    const double theta = a + (b - a) * static_cast<double>(j) / static_cast<double>(n);
    const EquipotentialSample s = theta > 0.0 ? solve_phi(theta, seed) : solve_phi_at_euler();
    seed = s.phi;
    f[j] = arc_density(s);
  }
  return detail::trapezoid(f, (b - a) / static_cast<double>(n));
}

/// Arc-length parametrization of the curve over [0, π/3], from Gauss-Legendre
/// panels. Used to place nodes at equal reduced-length spacing.
class EquipotentialArc {
 public:
  explicit EquipotentialArc(std::size_t panels = 128) : panels_(panels), cum_(panels + 1, 0.0) {
    if (panels < 1) throw DomainError("EquipotentialArc: panels must be positive");
    for (std::size_t i = 0; i < panels_; ++i) cum_[i + 1] = cum_[i] + integrate(edge(i), edge(i + 1));
  }

  double length() const { return cum_.back(); }

  /// Reduced length from θ = 0 to θ.
  double length_to(double theta) const {
    if (theta <= 0.0) return 0.0;
    if (theta >= kPi / 3.0) return length();
    const auto i = std::min(panels_ - 1, static_cast<std::size_t>(theta / (kPi / 3.0) * panels_));
    return cum_[i] + integrate(edge(i), theta);
  }

  /// Curve point at reduced length s ∈ [0, ℓ0].
  EquipotentialSample at_length(double s) const {
    if (s <= 0.0) return solve_phi_at_euler();
    if (s >= length()) return solve_phi(kPi / 3.0);
    const auto it = std::upper_bound(cum_.begin(), cum_.end(), s);
    const std::size_t i = static_cast<std::size_t>(it - cum_.begin()) - 1;
    const double a = edge(i), b = edge(i + 1);
    double theta = a + (b - a) * (s - cum_[i]) / (cum_[i + 1] - cum_[i]);
    for (int k = 0; k < 30; ++k) {
      const EquipotentialSample p = point(theta);
      const double step = (cum_[i] + integrate(a, theta) - s) / arc_density(p);
      theta = std::clamp(theta - step, a, b);
      if (std::abs(step) < 1e-15) break;
    }
    return point(theta);
  }

 private:
  double edge(std::size_t i) const {
    return i == panels_ ? kPi / 3.0 : static_cast<double>(i) * kPi / (3.0 * panels_);
  }
  static EquipotentialSample point(double theta) {
    // Within 1e-7 of the saddle the linear branch is exact to rounding, while
    // −F_θ/F_φ loses every digit.
    if (theta < 1e-7) {
      EquipotentialSample e = solve_phi_at_euler();
      e.theta = std::max(theta, 0.0);
      e.phi = e.phi_prime * e.theta;
      return e;
    }
    return solve_phi(theta);
  }
  static double integrate(double a, double b) {
    if (b <= a) return 0.0;
    return boost::math::quadrature::gauss<double, 15>::integrate(
        [](double t) { return arc_density(point(t)); }, a, b);
  }

  std::size_t panels_;
  std::vector<double> cum_;
};

/// Writes samples as CSV with columns theta, phi, phi_prime.
inline void write_samples_csv(std::ostream& os, const std::vector<EquipotentialSample>& samples) {
  char buf[128];
  os << "theta,phi,phi_prime\n";
  for (const auto& s : samples) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", s.theta, s.phi, s.phi_prime);
    os << buf;
  }
}

/// Point of the twelfth-arc E3 → M1 in the upper hemisphere at reduced length
/// s from E3. It is the image of the [0, π/3] arc under θ ↦ θ + 2π/3.
inline ShapeVector test_arc_shape(const EquipotentialArc& arc, double s, double I0) {
  const EquipotentialSample p = arc.at_length(s);
  const double theta = 2.0 * kPi / 3.0 + p.theta;
  ShapeVector u{I0 * std::cos(p.phi) * std::cos(theta), I0 * std::cos(p.phi) * std::sin(theta),
                I0 * std::sin(p.phi)};
  if (s >= arc.length()) u.u2 = 0.0;  // land exactly on the M1 meridian
  return u;
}

/// Constant-size path following the E3 → M1 equipotential twelfth-arc at
/// constant reduced speed, lifted to the configuration space with
/// ω(x_k, x_{k+1}) = 0 at every step.
inline DiscretePath reduced_test_path(double I0, double T, std::size_t n,
                                      const EquipotentialArc& arc = EquipotentialArc()) {
  if (!(I0 > 0.0) || !(T > 0.0) || n < 2) {
    throw DomainError("reduced_test_path: need I0 > 0, T > 0, n >= 2");
  }
  DiscretePath p;
  p.T = T;
  p.nodes.resize(n + 1);
  const double d = std::sqrt(I0 / 2.0);
  p.nodes[0] = {{Vec2{d, 0.0}, Vec2{-d, 0.0}, Vec2{0.0, 0.0}}};
  const double ell = arc.length();
  for (std::size_t k = 1; k <= n; ++k) {
    const double s = (k == n) ? ell : ell * static_cast<double>(k) / static_cast<double>(n);
    Configuration x = configuration_from_shape(test_arc_shape(arc, s, I0));
    // ⟨x_{k−1}, x⟩ = dot + iω; rotating x by −arg makes ω vanish.
    const Configuration& prev = p.nodes[k - 1];
    x = rotated(x, -std::atan2(omega(prev, x), dot(prev, x)));
    p.nodes[k] = x;
  }
  return p;
}

}  // namespace eight
