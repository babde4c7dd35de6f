#include "hyperrfk/hyperbolic_core.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <numbers>

namespace hyperrfk {

namespace {

constexpr double kLogSpaceThreshold = 700.0 * std::numbers::ln2;

void require_positive_radius(double r) {
  if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("radius must be positive and finite");
}

// Closed-form curvature integrals of B_r in extended precision:
// V_{n-j-1}(B_r) = coth^j(r) * omega_{n-1} sinh^{n-1}(r).
long double ball_curvature_integral(int n, int j, double r) {
  const long double s = std::sinh(static_cast<long double>(r));
  const long double c = std::cosh(static_cast<long double>(r));
  return static_cast<long double>(sphere_measure(n - 1)) * std::pow(c, j) * std::pow(s, n - 1 - j);
}

std::vector<long double> ball_quermass_ld(int n, double r) {
  std::vector<long double> w(static_cast<std::size_t>(n) + 1);
  w[0] = static_cast<long double>(sphere_measure(n - 1)) * sinh_power_integral(n - 1, r);
  w[1] = ball_curvature_integral(n, 0, r) / n;
  for (int j = 1; j <= n - 1; ++j) {
    const long double coeff = static_cast<long double>(j) / (n - j + 1);
    w[j + 1] = ball_curvature_integral(n, j, r) / n - coeff * w[j - 1];
  }
  return w;
}

}  // namespace

double sphere_measure(int i) {
  if (i < 0) throw DomainError("sphere dimension must be non-negative");
  const double h = 0.5 * (i + 1);
  return 2.0 * std::pow(std::numbers::pi, h) / std::tgamma(h);
}

double log_sinh(double t) {
  if (!(t > 0.0)) throw DomainError("log_sinh requires t > 0");
  if (t > 20.0) return t + std::log1p(-std::exp(-2.0 * t)) - std::numbers::ln2;
  return std::log(std::sinh(t));
}

double sinh_power(double t, double k) {
  if (k == 0.0) return 1.0;
  if (k * t > kLogSpaceThreshold) return std::exp(k * log_sinh(t));
  return std::pow(std::sinh(t), k);
}

long double sinh_power_integral(int k, double r) {
  if (k < 0) throw DomainError("sinh power must be non-negative");
  if (r <= 0.0) return 0.0L;
  const long double rl = r;
  if (k == 0) return rl;
  if (k == 1) return 2.0L * std::pow(std::sinh(0.5L * rl), 2);
  if (r < 1.0) {
    // The downward recursion cancels for small r; integrate directly instead.
    auto f = [k](long double t) { return std::pow(std::sinh(t), k); };
    // sinh^k is entire, so a fixed 30-point Gauss rule on [0, r < 1] is exact to rounding.
    return boost::math::quadrature::gauss<long double, 30>::integrate(f, 0.0L, rl);
  }
  // I_k = sinh^{k-1} cosh / k - (k-1)/k I_{k-2}
  const long double s = std::sinh(rl);
  const long double c = std::cosh(rl);
  long double prev = (k % 2 == 0) ? rl : c - 1.0L;
  for (int m = (k % 2 == 0) ? 2 : 3; m <= k; m += 2) {
    prev = std::pow(s, m - 1) * c / m - static_cast<long double>(m - 1) / m * prev;
  }
  return prev;
}

double ball_volume(Dimension n, double r) {
  require_positive_radius(r);
  if (n == 2) return 4.0 * std::numbers::pi * std::pow(std::sinh(0.5 * r), 2);
  if (n == 3 && r > 0.5) return std::numbers::pi * (std::sinh(2.0 * r) - 2.0 * r);
  return static_cast<double>(static_cast<long double>(sphere_measure(n - 1)) * sinh_power_integral(n - 1, r));
}

double ball_perimeter(Dimension n, double r) {
  require_positive_radius(r);
  return sphere_measure(n - 1) * sinh_power(r, n - 1);
}

QuermassVector ball_quermass(Dimension n, double r) {
  require_positive_radius(r);
  const auto wl = ball_quermass_ld(n, r);
  QuermassVector q{n, std::vector<double>(wl.begin(), wl.end())};
  const double terminal = sphere_measure(n - 1) / n;
  if (!(std::abs(q.w[static_cast<std::size_t>(n)] - terminal) <= 1e-10 * terminal))
    throw ConsistencyError("ball quermass recursion does not reproduce W_n = omega_{n-1}/n");
  q.w[static_cast<std::size_t>(n)] = terminal;
  q.w[0] = ball_volume(n, r);
  return q;
}

double ball_quermass_entry(Dimension n, int m, double r) {
  if (m < 0 || m > n) throw DomainError("quermass index out of range");
  require_positive_radius(r);
  if (m == 0) return ball_volume(n, r);
  if (m == 1) return ball_perimeter(n, r) / n;
  return static_cast<double>(ball_quermass_ld(n, r)[static_cast<std::size_t>(m)]);
}

double quermass_inverse_radius(Dimension n, int m, double w) {
  if (m < 0 || m > n - 1) throw DomainError("quermass index must lie in 0..n-1");
  if (!(w > 0.0) || !std::isfinite(w)) throw DomainError("quermass value must be positive");
  auto f = [&](double r) { return ball_quermass_entry(n, m, r) - w; };

  double lo = 0.5, hi = 1.0;
  for (int k = 0; f(hi) < 0.0; ++k) {
    if (k > 200) throw SearchError("quermass_inverse_radius: upper bracket expansion failed");
    lo = hi;
    hi *= 2.0;
  }
  for (int k = 0; f(lo) > 0.0; ++k) {
    if (k > 2000) throw SearchError("quermass_inverse_radius: lower bracket expansion failed");
    hi = lo;
    lo *= 0.5;
  }
  std::uintmax_t iters = 200;
  auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, boost::math::tools::eps_tolerance<double>(52), iters);
  const double fa = std::abs(f(a)), fb = std::abs(f(b));
  const double r = fa <= fb ? a : b;
  if (!(std::min(fa, fb) <= 1e-12 * w))
    throw SearchError("quermass_inverse_radius: residual above 1e-12 relative");
  return r;
}

PoincarePoint::PoincarePoint(std::vector<double> x) : x_(std::move(x)) {
  if (x_.empty()) throw DomainError("Poincare point needs at least one coordinate");
  if (!(norm2() < 1.0)) throw DomainError("Poincare point must lie in the open unit ball");
}

double PoincarePoint::norm2() const noexcept {
  double s = 0.0;
  for (double v : x_) s += v * v;
  return s;
}

double poincare_distance(const PoincarePoint& x, const PoincarePoint& y) {
  if (x.dim() != y.dim()) throw DomainError("Poincare points of different dimension");
  double d2 = 0.0;
  for (std::size_t i = 0; i < x.dim(); ++i) {
    const double d = x.coords()[i] - y.coords()[i];
    d2 += d * d;
  }
  // arccosh(1 + 2q) = 2 asinh(sqrt(q)) avoids cancellation near the diagonal.
  const double q = d2 / ((1.0 - x.norm2()) * (1.0 - y.norm2()));
  return 2.0 * std::asinh(std::sqrt(q));
}

double disk_distance(std::complex<double> x, std::complex<double> y) {
  const double nx = std::norm(x), ny = std::norm(y);
  if (!(nx < 1.0) || !(ny < 1.0)) throw DomainError("point outside the Poincare disk");
  const double q = std::norm(x - y) / ((1.0 - nx) * (1.0 - ny));
  return 2.0 * std::asinh(std::sqrt(q));
}

}  // namespace hyperrfk
