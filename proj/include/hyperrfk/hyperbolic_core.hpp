#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <vector>

#include "hyperrfk/errors.hpp"

namespace hyperrfk {

/// Ambient dimension of H^n; always at least 2.
class Dimension {
 public:
  explicit Dimension(int n) : n_(n) {
    if (n < 2) throw DomainError("dimension must be at least 2");
  }
  int value() const noexcept { return n_; }
  operator int() const noexcept { return n_; }

 private:
  int n_;
};

/// Hausdorff measure of the unit i-sphere, 2 pi^{(i+1)/2} / Gamma((i+1)/2).
double sphere_measure(int i);

/// log(sinh t) for t > 0, stable for large t.
double log_sinh(double t);

/// sinh(t)^k, switching to log-space once k*t exceeds 700 ln 2.
double sinh_power(double t, double k);

/// Integral of sinh(t)^k over [0, r] in extended precision.
long double sinh_power_integral(int k, double r);

double ball_volume(Dimension n, double r);
double ball_perimeter(Dimension n, double r);

/// Quermassintegrals (W_0, ..., W_n) of a body in H^n.
///
/// Conventions: W_0 is the volume, W_1 = P / n and W_n = omega_{n-1} / n.
struct QuermassVector {
  int n = 0;
  std::vector<double> w;

  double operator[](int j) const { return w.at(static_cast<std::size_t>(j)); }
};

/// W_j(B_r) for all j, from the curvature-integral recursion seeded by
/// volume and perimeter. Throws ConsistencyError if the recursion does not
/// land on omega_{n-1}/n.
QuermassVector ball_quermass(Dimension n, double r);

/// f_m(r) = W_m(B_r).
double ball_quermass_entry(Dimension n, int m, double r);

/// Unique r with W_m(B_r) = w.
double quermass_inverse_radius(Dimension n, int m, double w);

/// Point of the Poincare ball chart, |x| < 1.
class PoincarePoint {
 public:
  explicit PoincarePoint(std::vector<double> x);
  PoincarePoint(double x, double y) : PoincarePoint(std::vector<double>{x, y}) {}

  std::span<const double> coords() const noexcept { return x_; }
  std::size_t dim() const noexcept { return x_.size(); }
  double norm2() const noexcept;

 private:
  std::vector<double> x_;
};

double poincare_distance(const PoincarePoint& x, const PoincarePoint& y);

/// Same as poincare_distance for points of the unit disk given as complex numbers.
double disk_distance(std::complex<double> x, std::complex<double> y);

/// Conformal factor 2 / (1 - |x|^2) of the Poincare metric.
inline double conformal_factor(double norm2) { return 2.0 / (1.0 - norm2); }

/// Chart radius tanh(r/2) of a point at hyperbolic distance r from the origin.
inline double chart_radius(double r) { return std::tanh(0.5 * r); }

}  // namespace hyperrfk
