#include "hyperrfk/bodies.hpp"

#include <boost/math/special_functions/binomial.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace hyperrfk {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kPanelNodes = 16;

double binom(int n, int k) { return boost::math::binomial_coefficient<double>(static_cast<unsigned>(n), static_cast<unsigned>(k)); }

template <class F>
void for_each_harmonic(const std::vector<double>& coeffs, F&& f) {
  for (std::size_t i = 0; i < coeffs.size(); ++i)
    if (coeffs[i] != 0.0) f(static_cast<double>(i + 1), coeffs[i]);
}

// Composite 16-point Gauss-Legendre rule on [0, pi].
void gauss_nodes_0_pi(int samples, std::vector<double>& nodes, std::vector<double>& weights) {
  using Rule = boost::math::quadrature::gauss<double, kPanelNodes>;
  const int panels = std::max(1, samples / kPanelNodes);
  const double h = std::numbers::pi / panels;
  nodes.clear();
  weights.clear();
  nodes.reserve(static_cast<std::size_t>(panels * kPanelNodes));
  weights.reserve(nodes.capacity());
  const auto& x = Rule::abscissa();
  const auto& w = Rule::weights();
  for (int p = 0; p < panels; ++p) {
    const double mid = (p + 0.5) * h;
    for (std::size_t k = 0; k < x.size(); ++k) {
      for (double sgn : {-1.0, 1.0}) {
        nodes.push_back(mid + sgn * 0.5 * h * x[k]);
        weights.push_back(0.5 * h * w[k]);
      }
    }
  }
}

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw NumericError(std::string("non-finite value in ") + what);
}

std::vector<double> elementary_symmetric(std::span<const double> kappa) {
  std::vector<double> e(kappa.size() + 1, 0.0);
  e[0] = 1.0;
  for (std::size_t i = 0; i < kappa.size(); ++i)
    for (std::size_t j = i + 1; j >= 1; --j) e[j] += kappa[i] * e[j - 1];
  return e;
}

double profile_perimeter(const CurvatureProfile& p) {
  double s = 0.0;
  for (double w : p.weight) s += w;
  return s;
}

double volume_2d(const Body2D& body) {
  const int n = body.samples();
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    const double sh = std::sinh(0.5 * body.radius(kTwoPi * i / n));
    s += 2.0 * sh * sh;
  }
  return s * kTwoPi / n;
}

double volume_revolution(const RevolutionBody& body) {
  std::vector<double> u, w;
  gauss_nodes_0_pi(body.samples(), u, w);
  const int n = body.dim();
  long double s = 0.0L;
  for (std::size_t i = 0; i < u.size(); ++i)
    s += w[i] * std::pow(std::sin(u[i]), n - 2) * sinh_power_integral(n - 1, body.h(u[i]));
  return sphere_measure(n - 2) * static_cast<double>(s);
}

}  // namespace

// --- FourierSeries ---------------------------------------------------------

double FourierSeries::value(double t) const {
  double s = a0;
  for_each_harmonic(cos_coeffs, [&](double k, double c) { s += c * std::cos(k * t); });
  for_each_harmonic(sin_coeffs, [&](double k, double c) { s += c * std::sin(k * t); });
  return s;
}

double FourierSeries::derivative(double t) const {
  double s = 0.0;
  for_each_harmonic(cos_coeffs, [&](double k, double c) { s -= k * c * std::sin(k * t); });
  for_each_harmonic(sin_coeffs, [&](double k, double c) { s += k * c * std::cos(k * t); });
  return s;
}

double FourierSeries::second_derivative(double t) const {
  double s = 0.0;
  for_each_harmonic(cos_coeffs, [&](double k, double c) { s -= k * k * c * std::cos(k * t); });
  for_each_harmonic(sin_coeffs, [&](double k, double c) { s -= k * k * c * std::sin(k * t); });
  return s;
}

bool FourierSeries::is_constant() const {
  auto zero = [](double c) { return c == 0.0; };
  return std::all_of(cos_coeffs.begin(), cos_coeffs.end(), zero) &&
         std::all_of(sin_coeffs.begin(), sin_coeffs.end(), zero);
}

// --- Body2D ----------------------------------------------------------------

Body2D::Body2D(FourierSeries rho, int samples) : rho_(std::move(rho)), samples_(samples) {
  if (samples_ < 16) throw DomainError("Body2D needs at least 16 samples");
  const int probe = 4 * samples_;
  for (int i = 0; i < probe; ++i) {
    const double r = rho_.value(kTwoPi * i / probe);
    if (!(r > 0.0) || !std::isfinite(r)) throw DomainError("Body2D radial function must be positive");
  }
}

Body2D Body2D::ball(double r, int samples) {
  if (!(r > 0.0)) throw DomainError("ball radius must be positive");
  return Body2D(FourierSeries{r, {}, {}}, samples);
}

Complex Body2D::chart_point(double theta) const { return std::polar(chart_radius(radius(theta)), theta); }

Complex Body2D::chart_normal(double theta) const {
  const double r = radius(theta);
  const double rho = chart_radius(r);
  // d/dtheta tanh(r/2) = r' / (2 cosh^2(r/2))
  const double c = std::cosh(0.5 * r);
  const double drho = radius_d1(theta) / (2.0 * c * c);
  const Complex e = std::polar(1.0, theta);
  const Complex tangent = drho * e + Complex(0.0, 1.0) * rho * e;
  return Complex(0.0, -1.0) * tangent / std::abs(tangent);
}

// --- RevolutionBody --------------------------------------------------------

RevolutionBody::RevolutionBody(Dimension n, double a0, std::vector<double> cos_even, int samples)
    : n_(n), a0_(a0), cos_even_(std::move(cos_even)), samples_(samples) {
  if (n_ < 3) throw DomainError("revolution bodies require n >= 3");
  if (samples_ < kPanelNodes) throw DomainError("RevolutionBody needs at least 16 samples");
  const int probe = 4 * samples_;
  for (int i = 0; i <= probe; ++i) {
    const double v = h(std::numbers::pi * i / probe);
    if (!(v > 0.0) || !std::isfinite(v)) throw DomainError("revolution radial function must be positive");
  }
}

RevolutionBody RevolutionBody::ball(Dimension n, double r, int samples) {
  if (!(r > 0.0)) throw DomainError("ball radius must be positive");
  return RevolutionBody(n, r, {}, samples);
}

bool RevolutionBody::is_ball() const {
  return std::all_of(cos_even_.begin(), cos_even_.end(), [](double c) { return c == 0.0; });
}

double RevolutionBody::h(double u) const {
  double s = a0_;
  for_each_harmonic(cos_even_, [&](double k, double c) { s += c * std::cos(2.0 * k * u); });
  return s;
}

double RevolutionBody::h_d1(double u) const {
  double s = 0.0;
  for_each_harmonic(cos_even_, [&](double k, double c) { s -= 2.0 * k * c * std::sin(2.0 * k * u); });
  return s;
}

double RevolutionBody::h_d2(double u) const {
  double s = 0.0;
  for_each_harmonic(cos_even_, [&](double k, double c) { s -= 4.0 * k * k * c * std::cos(2.0 * k * u); });
  return s;
}

int body_dimension(const Body& body) {
  return std::visit([](const auto& b) {
    if constexpr (std::is_same_v<std::decay_t<decltype(b)>, Body2D>) return 2;
    else return b.dim();
  }, body);
}

bool body_is_ball(const Body& body) {
  return std::visit([](const auto& b) { return b.is_ball(); }, body);
}

// --- curvature -------------------------------------------------------------

double polar_graph_curvature(double r1, double r2, double f, double f1) {
  const double q = r1 * r1 + f * f;
  return (-r2 * f + 2.0 * r1 * r1 * f1 + f * f * f1) / (q * std::sqrt(q));
}

CurvatureProfile curvature_2d(const Body2D& body) {
  const int n = body.samples();
  CurvatureProfile p;
  p.n = 2;
  p.param.resize(static_cast<std::size_t>(n));
  p.kappa.resize(static_cast<std::size_t>(n));
  p.weight.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double t = kTwoPi * i / n;
    const double r = body.radius(t), r1 = body.radius_d1(t), r2 = body.radius_d2(t);
    const double f = std::sinh(r), f1 = std::cosh(r);
    const auto k = static_cast<std::size_t>(i);
    p.param[k] = t;
    p.kappa[k] = polar_graph_curvature(r1, r2, f, f1);
    p.weight[k] = std::sqrt(r1 * r1 + f * f) * kTwoPi / n;
    require_finite(p.kappa[k], "curvature_2d");
  }
  return p;
}

CurvatureProfile curvature_revolution(const RevolutionBody& body) {
  const int n = body.dim();
  std::vector<double> u, w;
  gauss_nodes_0_pi(body.samples(), u, w);
  CurvatureProfile p;
  p.n = n;
  p.param = u;
  p.kappa.resize(u.size() * static_cast<std::size_t>(n - 1));
  p.weight.resize(u.size());
  const double omega = sphere_measure(n - 2);
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double h = body.h(u[i]), h1 = body.h_d1(u[i]), h2 = body.h_d2(u[i]);
    const double sh = std::sinh(h), ch = std::cosh(h);
    const double su = std::sin(u[i]), cu = std::cos(u[i]);
    const double arc = std::sqrt(h1 * h1 + sh * sh);
    const double k_meridian = polar_graph_curvature(h1, h2, sh, ch);
    // Orbit curvature coth(rho) * d rho / d nu, rho = distance to the axis.
    double k_orbit;
    if (su < 1e-6) {
      k_orbit = (sh * ch - h2) / (sh * sh);
    } else {
      k_orbit = (sh * ch * su - h1 * cu) / (sh * su * arc);
    }
    const double sinh_rho = sh * su;
    p.kappa[i * static_cast<std::size_t>(n - 1)] = k_meridian;
    for (int m = 1; m < n - 1; ++m) p.kappa[i * static_cast<std::size_t>(n - 1) + static_cast<std::size_t>(m)] = k_orbit;
    p.weight[i] = w[i] * omega * std::pow(sinh_rho, n - 2) * arc;
    require_finite(k_meridian, "curvature_revolution");
    require_finite(k_orbit, "curvature_revolution");
  }
  return p;
}

CurvatureProfile curvature_profile(const Body& body) {
  return std::visit([](const auto& b) {
    if constexpr (std::is_same_v<std::decay_t<decltype(b)>, Body2D>) return curvature_2d(b);
    else return curvature_revolution(b);
  }, body);
}

ConvexityReport convexity_report(const CurvatureProfile& profile, double tol) {
  ConvexityReport r;
  r.min_curvature = *std::min_element(profile.kappa.begin(), profile.kappa.end());
  r.is_convex = r.min_curvature >= -tol;
  r.is_h_convex = r.min_curvature >= 1.0 - tol;
  return r;
}

ConvexityReport convexity_report(const Body& body, double tol) {
  return convexity_report(curvature_profile(body), tol);
}

// --- measures --------------------------------------------------------------

double enclosed_volume(const Body& body) {
  return std::visit([](const auto& b) {
    if constexpr (std::is_same_v<std::decay_t<decltype(b)>, Body2D>) return volume_2d(b);
    else return volume_revolution(b);
  }, body);
}

BoundaryMeasures boundary_measures(const Body& body) {
  const auto profile = curvature_profile(body);
  BoundaryMeasures m;
  m.perimeter = profile_perimeter(profile);
  m.volume = enclosed_volume(body);

  const Body coarse = std::visit([](const auto& b) -> Body { return b.with_samples(b.samples() / 2); }, body);
  const double p_half = profile_perimeter(curvature_profile(coarse));
  const double v_half = enclosed_volume(coarse);
  if (std::abs(p_half - m.perimeter) > 1e-6 * m.perimeter || std::abs(v_half - m.volume) > 1e-6 * m.volume)
    throw ConsistencyError("body resolution too coarse: half-resolution measures differ by more than 1e-6");

  if (std::holds_alternative<Body2D>(body)) {
    double total_curvature = 0.0;
    for (std::size_t i = 0; i < profile.size(); ++i) total_curvature += profile.kappa[i] * profile.weight[i];
    m.area_gauss_bonnet = total_curvature - kTwoPi;
    if (std::abs(m.area_gauss_bonnet - m.volume) > 1e-8 * m.volume)
      throw ConsistencyError("Gauss-Bonnet area disagrees with polar area");
  }
  return m;
}

CurvatureIntegrals curvature_integrals(const CurvatureProfile& profile) {
  const int n = profile.n;
  CurvatureIntegrals ci{n, std::vector<double>(static_cast<std::size_t>(n), 0.0)};
  for (std::size_t i = 0; i < profile.size(); ++i) {
    const auto e = elementary_symmetric(profile.curvatures(i));
    for (int j = 0; j <= n - 1; ++j)
      ci.v[static_cast<std::size_t>(n - j - 1)] += profile.weight[i] * e[static_cast<std::size_t>(j)] / binom(n - 1, j);
  }
  return ci;
}

CurvatureIntegrals curvature_integrals(const Body& body) { return curvature_integrals(curvature_profile(body)); }

QuermassVector quermass_from_integrals(const CurvatureIntegrals& ci, double volume) {
  const int n = ci.n;
  QuermassVector q{n, std::vector<double>(static_cast<std::size_t>(n) + 1)};
  auto V = [&](int k) { return ci.v[static_cast<std::size_t>(k)]; };
  q.w[0] = volume;
  q.w[1] = V(n - 1) / n;
  for (int j = 1; j <= n - 1; ++j)
    q.w[static_cast<std::size_t>(j + 1)] =
        V(n - j - 1) / n - static_cast<double>(j) / (n - j + 1) * q.w[static_cast<std::size_t>(j - 1)];
  const double terminal = sphere_measure(n - 1) / n;
  if (std::abs(q.w[static_cast<std::size_t>(n)] - terminal) > 1e-6 * terminal)
    throw ConsistencyError("quermassintegrals: W_n deviates from omega_{n-1}/n; body not closed or under-resolved");
  return q;
}

QuermassVector quermassintegrals(const Body& body) {
  return quermass_from_integrals(curvature_integrals(body), enclosed_volume(body));
}

// --- parallel bodies -------------------------------------------------------

double parallel_perimeter_direct(const CurvatureProfile& profile, double delta) {
  if (delta < 0.0) throw DomainError("parallel distance must be non-negative");
  const double c = std::cosh(delta), s = std::sinh(delta);
  double total = 0.0;
  for (std::size_t i = 0; i < profile.size(); ++i) {
    double jac = 1.0;
    for (double k : profile.curvatures(i)) jac *= c + k * s;
    total += jac * profile.weight[i];
  }
  return total;
}

double parallel_perimeter_direct(const Body& body, double delta) {
  const auto profile = curvature_profile(body);
  if (!convexity_report(profile).is_convex) throw PreconditionError("parallel_perimeter_direct requires a convex body");
  return parallel_perimeter_direct(profile, delta);
}

double steiner_evaluate(const CurvatureIntegrals& ci, double delta) {
  if (delta < 0.0) throw DomainError("parallel distance must be non-negative");
  const int n = ci.n;
  const double c = std::cosh(delta), s = std::sinh(delta);
  double total = 0.0;
  for (int j = 0; j <= n - 1; ++j)
    total += binom(n - 1, j) * ci.v[static_cast<std::size_t>(n - 1 - j)] * std::pow(s, j) * std::pow(c, n - 1 - j);
  return total;
}

double parallel_volume(const Body& body, double delta) {
  if (delta < 0.0) throw DomainError("parallel distance must be non-negative");
  const auto profile = curvature_profile(body);
  if (!convexity_report(profile).is_convex) throw PreconditionError("parallel_volume requires a convex body");
  const double vol = enclosed_volume(body);
  if (delta == 0.0) return vol;
  const auto ci = curvature_integrals(profile);
  auto f = [&](double t) { return steiner_evaluate(ci, t); };
  return vol + boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, delta, 15, 1e-14);
}

CurvatureProfile flow_profile(const CurvatureProfile& profile, double delta) {
  if (delta < 0.0) throw DomainError("parallel distance must be non-negative");
  const double c = std::cosh(delta), s = std::sinh(delta);
  CurvatureProfile out = profile;
  for (std::size_t i = 0; i < profile.size(); ++i) {
    double jac = 1.0;
    const auto k_in = profile.curvatures(i);
    for (std::size_t m = 0; m < k_in.size(); ++m) {
      const double k = k_in[m];
      const double den = c + k * s;
      jac *= den;
      out.kappa[i * k_in.size() + m] = (k * c + s) / den;
    }
    out.weight[i] = profile.weight[i] * jac;
  }
  return out;
}

}  // namespace hyperrfk
