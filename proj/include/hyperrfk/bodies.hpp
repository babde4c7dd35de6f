#pragma once

#include <span>
#include <variant>
#include <vector>

#include "hyperrfk/disk_isometry.hpp"
#include "hyperrfk/hyperbolic_core.hpp"

namespace hyperrfk {

inline constexpr int kDefaultBodySamples = 2048;

/// Truncated Fourier series a0 + sum_k (c_k cos k t + s_k sin k t), k = 1, 2, ...
struct FourierSeries {
  double a0 = 0.0;
  std::vector<double> cos_coeffs;
  std::vector<double> sin_coeffs;

  double value(double t) const;
  double derivative(double t) const;
  double second_derivative(double t) const;
  bool is_constant() const;
};

/// Closed curve in H^2 given as a radial graph r(theta) in geodesic polar
/// coordinates about a base point.
class Body2D {
 public:
  explicit Body2D(FourierSeries rho, int samples = kDefaultBodySamples);
  static Body2D ball(double r, int samples = kDefaultBodySamples);

  double radius(double theta) const { return rho_.value(theta); }
  double radius_d1(double theta) const { return rho_.derivative(theta); }
  double radius_d2(double theta) const { return rho_.second_derivative(theta); }

  const FourierSeries& series() const noexcept { return rho_; }
  int samples() const noexcept { return samples_; }
  Body2D with_samples(int samples) const { return Body2D(rho_, samples); }
  bool is_ball() const { return rho_.is_constant(); }

  /// Point of the boundary in the Poincare disk chart (base point at the origin).
  Complex chart_point(double theta) const;
  /// Outward unit normal of the chart curve at theta.
  Complex chart_normal(double theta) const;

 private:
  FourierSeries rho_;
  int samples_;
};

/// Rotationally symmetric body in H^n (n >= 3): radial graph r = h(u) over
/// the polar angle u in [0, pi], h(u) = a0 + sum_k c_k cos(2 k u).
class RevolutionBody {
 public:
  RevolutionBody(Dimension n, double a0, std::vector<double> cos_even, int samples = kDefaultBodySamples);
  static RevolutionBody ball(Dimension n, double r, int samples = kDefaultBodySamples);

  int dim() const noexcept { return n_; }
  double a0() const noexcept { return a0_; }
  const std::vector<double>& cos_even() const noexcept { return cos_even_; }
  int samples() const noexcept { return samples_; }
  RevolutionBody with_samples(int samples) const { return RevolutionBody(Dimension(n_), a0_, cos_even_, samples); }
  bool is_ball() const;

  double h(double u) const;
  double h_d1(double u) const;
  double h_d2(double u) const;

 private:
  int n_;
  double a0_;
  std::vector<double> cos_even_;
  int samples_;
};

using Body = std::variant<Body2D, RevolutionBody>;

int body_dimension(const Body& body);
bool body_is_ball(const Body& body);

/// Principal curvatures and boundary measure at quadrature nodes.
struct CurvatureProfile {
  int n = 2;
  std::vector<double> param;
  std::vector<double> kappa;   // n-1 entries per node
  std::vector<double> weight;  // quadrature weight times area element

  std::size_t size() const noexcept { return param.size(); }
  std::span<const double> curvatures(std::size_t i) const {
    const auto k = static_cast<std::size_t>(n - 1);
    return {kappa.data() + i * k, k};
  }
};

/// Geodesic curvature of the polar graph (r(t), t) in the warped metric
/// dr^2 + f(r)^2 dt^2. With f = sinh this is the hyperbolic plane; f(r) = r
/// gives the Euclidean plane.
double polar_graph_curvature(double r1, double r2, double f, double f1);

CurvatureProfile curvature_2d(const Body2D& body);
CurvatureProfile curvature_revolution(const RevolutionBody& body);
CurvatureProfile curvature_profile(const Body& body);

struct ConvexityReport {
  double min_curvature = 0.0;
  bool is_convex = false;
  bool is_h_convex = false;
};

ConvexityReport convexity_report(const Body& body, double tol = 1e-9);
ConvexityReport convexity_report(const CurvatureProfile& profile, double tol = 1e-9);

struct BoundaryMeasures {
  double perimeter = 0.0;
  double volume = 0.0;
  /// Gauss-Bonnet area (n = 2 only; zero otherwise).
  double area_gauss_bonnet = 0.0;
};

/// Perimeter and volume, with the half-resolution agreement check and (for
/// plane bodies) the Gauss-Bonnet cross-check.
BoundaryMeasures boundary_measures(const Body& body);
double enclosed_volume(const Body& body);

/// v[n-j-1] = V_{n-j-1}(K) = integral of H_j over the boundary.
struct CurvatureIntegrals {
  int n = 2;
  std::vector<double> v;
};

CurvatureIntegrals curvature_integrals(const CurvatureProfile& profile);
CurvatureIntegrals curvature_integrals(const Body& body);

/// Triangular solve of the curvature-integral relation, seeded with the volume.
QuermassVector quermassintegrals(const Body& body);
QuermassVector quermass_from_integrals(const CurvatureIntegrals& ci, double volume);

/// P(K_delta) as the boundary integral of prod_i (cosh d + kappa_i sinh d).
double parallel_perimeter_direct(const Body& body, double delta);
double parallel_perimeter_direct(const CurvatureProfile& profile, double delta);

/// P(K_delta) = sum_j C(n-1, j) V_{n-1-j} sinh^j(d) cosh^{n-1-j}(d).
double steiner_evaluate(const CurvatureIntegrals& ci, double delta);

double parallel_volume(const Body& body, double delta);

/// Curvatures and area elements of the parallel hypersurface at distance delta:
/// kappa -> (kappa cosh d + sinh d) / (cosh d + kappa sinh d).
CurvatureProfile flow_profile(const CurvatureProfile& profile, double delta);

}  // namespace hyperrfk
