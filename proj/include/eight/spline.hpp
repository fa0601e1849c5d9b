#pragma once

// Periodic cubic spline on a uniform grid.

#include <cmath>
#include <cstddef>
#include <vector>

#include "eight/errors.hpp"

namespace eight {

class PeriodicSpline {
 public:
  PeriodicSpline() = default;

  /// y[k] is the value at t = k·period/N, k = 0..N−1; y[N] ≡ y[0] is implied.
  PeriodicSpline(std::vector<double> y, double period) : y_(std::move(y)), period_(period) {
    const std::size_t N = y_.size();
    if (N < 3) throw DomainError("PeriodicSpline: need at least 3 samples");
    if (!(period > 0.0)) throw DomainError("PeriodicSpline: period must be positive");
    h_ = period / N;
    // M_{k−1} + 4M_k + M_{k+1} = 6(y_{k+1} − 2y_k + y_{k−1})/h², cyclic.
    std::vector<double> rhs(N);
    for (std::size_t k = 0; k < N; ++k) {
      rhs[k] = 6.0 * (y_[(k + 1) % N] - 2.0 * y_[k] + y_[(k + N - 1) % N]) / (h_ * h_);
    }
    m_ = solve_cyclic(rhs);
  }

  std::size_t size() const { return y_.size(); }
  double period() const { return period_; }

  double operator()(double t) const {
    const auto [k, s] = locate(t);
    const std::size_t k1 = (k + 1) % y_.size();
    const double a = 1.0 - s, b = s;
    return a * y_[k] + b * y_[k1] + ((a * a * a - a) * m_[k] + (b * b * b - b) * m_[k1]) * h_ * h_ / 6.0;
  }

  double derivative(double t) const {
    const auto [k, s] = locate(t);
    const std::size_t k1 = (k + 1) % y_.size();
    const double a = 1.0 - s, b = s;
    return (y_[k1] - y_[k]) / h_ + ((1.0 - 3.0 * a * a) * m_[k] + (3.0 * b * b - 1.0) * m_[k1]) * h_ / 6.0;
  }

 private:
  struct Loc {
    std::size_t k;
    double s;
  };
  Loc locate(double t) const {
    double u = std::fmod(t, period_);
    if (u < 0.0) u += period_;
    double f = u / h_;
    std::size_t k = static_cast<std::size_t>(f);
    if (k >= y_.size()) k = y_.size() - 1;
    return {k, f - static_cast<double>(k)};
  }

  // Cyclic system with diagonal 4 and unit off-diagonals (Sherman–Morrison).
  static std::vector<double> solve_cyclic(const std::vector<double>& r) {
    const std::size_t N = r.size();
    const double gamma = -4.0;
    auto thomas = [N, gamma](std::vector<double> d) {
      std::vector<double> c(N);
      double b0 = 4.0 - gamma;
      c[0] = 1.0 / b0;
      d[0] /= b0;
      for (std::size_t i = 1; i < N; ++i) {
        const double bi = (i == N - 1 ? 4.0 - 1.0 / gamma : 4.0) - c[i - 1];
        c[i] = 1.0 / bi;
        d[i] = (d[i] - d[i - 1]) / bi;
      }
      for (std::size_t i = N - 1; i-- > 0;) d[i] -= c[i] * d[i + 1];
      return d;
    };
    const std::vector<double> x = thomas(r);
    std::vector<double> u(N, 0.0);
    u[0] = gamma;
    u[N - 1] = 1.0;
    const std::vector<double> z = thomas(u);
    const double fact = (x[0] + x[N - 1] / gamma) / (1.0 + z[0] + z[N - 1] / gamma);
    std::vector<double> out(N);
    for (std::size_t i = 0; i < N; ++i) out[i] = x[i] - fact * z[i];
    return out;
  }

  std::vector<double> y_, m_;
  double period_ = 1.0;
  double h_ = 1.0;
};

}  // namespace eight
