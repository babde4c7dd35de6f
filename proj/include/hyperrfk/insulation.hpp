#pragma once

#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "hyperrfk/bodies.hpp"
#include "hyperrfk/mesh.hpp"

namespace hyperrfk {

/// Insulating layer of thickness delta around the body Omega_D, with Robin
/// parameter beta on the outer boundary of Omega_D + delta B_1.
struct InsulationSpec {
  Dimension n{2};
  double p = 2.0;
  std::variant<double, Body> body;  // double = ball radius
  double delta = 1.0;
  double beta = 1.0;

  /// Throws DomainError on non-positive delta/beta, p <= 1, or a body of the wrong dimension.
  void validate() const;
};

/// Minimum of int_0^delta |g'|^p w(s) ds + beta w(delta) |g(delta)|^p over
/// g(0) = 1, from the constant-flux relation w |g'|^{p-1} = K: E = K.
double layer_energy_flux(const std::function<double(double)>& weight, double p, double delta, double beta);

/// Energy of the shell B_{r+delta} \ B_r in H^n from the flux relation.
double radial_energy_exact(Dimension n, double p, double r, double delta, double beta);
/// Closed form for n = 2, p = 2.
double radial_energy_closed_form_2d(double r, double delta, double beta);

struct RadialEnergyOptions {
  int elements = 4000;       // finest level; the coarse level uses half
  double grad_tol = 1e-12;   // relative Newton decrement
  int max_iter = 100;
};

struct RadialEnergyResult {
  double energy = 0.0;         // Richardson-extrapolated
  double energy_fine = 0.0;
  double energy_coarse = 0.0;
  double flux_spread = 0.0;    // max relative deviation of element fluxes on the fine level
  int iterations = 0;          // Newton steps on the fine level
  std::vector<double> t, u;    // fine minimizer
};

/// P1 minimization of the radial energy with damped Newton steps.
RadialEnergyResult radial_energy(Dimension n, double p, double r, double delta, double beta,
                                 const RadialEnergyOptions& opts = {});

/// Outer parallel curve of a convex hole at hyperbolic distance delta, in the chart.
ChartCurve outer_parallel_curve(const Body2D& hole, double delta);

struct FemEnergyResult {
  double energy = 0.0;
  std::vector<double> u;
  Mesh mesh;
};

/// Robin-Dirichlet problem at n = p = 2: u = 1 on the hole, Robin weight beta on
/// the outer parallel curve with the length element lambda ds.
FemEnergyResult fem_energy_p2(const Body2D& hole, double delta, double beta, double h_mesh = 0.01);

struct InsulationOptions {
  double h_mesh = 0.01;
  double tol_margin = 1e-6;
  double tol_eq = 1e-4;   // relative, for the ball case
};

struct InsulationReport {
  int n = 2;
  double p = 2.0;
  double delta = 0.0, beta = 0.0;
  double r_star = 0.0;       // radius of the ball with the same W_{n-1}
  double E_body = 0.0;
  double E_ball = 0.0;
  double E_ball_radial = 0.0;
  double margin = 0.0;       // E_ball - E_body
  std::string method;        // "radial", "fem2d" or "parallel_bound"
  bool body_is_ball = false;
  bool equality_detected = false;
  bool verdict = false;      // margin >= -tol_margin
  int fem_dofs = 0;
};

/// Compares the body against the ball with the same W_{n-1}. Balls use the
/// radial solution; n = 2 bodies use FEM for both body and ball at p = 2;
/// otherwise the parallel-coordinate upper bound for the body.
InsulationReport insulation_verdict(const InsulationSpec& spec, const InsulationOptions& opts = {});

}  // namespace hyperrfk
