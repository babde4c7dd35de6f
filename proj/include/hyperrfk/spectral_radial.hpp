#pragma once

#include <iosfwd>
#include <vector>

#include "hyperrfk/hyperbolic_core.hpp"

namespace hyperrfk {

/// Concentric shell B_R \ closure(B_r) in H^n with exponent p.
struct ShellSpec {
  ShellSpec(Dimension n, double p, double r, double R);

  Dimension n;
  double p;
  double r;
  double R;

  double conjugate() const { return p / (p - 1.0); }
};

struct ShellOptions {
  double tol = 4e-16;      // relative width of the final tau bracket
  int max_iter = 200;
  double ode_tol = 1e-12;  // absolute and relative, adaptive RK
  int samples = 512;
  double amplitude = 1.0;  // v(R)
};

/// Samples of v and v' on a uniform grid of [r, R].
struct RadialProfile {
  std::vector<double> t;
  std::vector<double> v;
  std::vector<double> dv;
};

struct ShellResiduals {
  double bc_inner = 0.0;  // |v(r)| / v(R)
  double bc_outer = 0.0;  // |v'(R)|
  double ode_max = 0.0;   // max |v - v_ref| / v(R) against a tighter integration
};

struct EigResult {
  ShellSpec spec;
  double tau1 = 0.0;
  RadialProfile profile;
  ShellResiduals residuals;
  double rayleigh = 0.0;  // quotient accumulated along the final trajectory
  int iterations = 0;
  long ode_steps = 0;
};

/// First eigenvalue of the radial mixed problem
///   (s |v'|^{p-2} v')' + tau s |v|^{p-2} v = 0,  s = sinh^{n-1} t,
///   v(r) = 0, v'(R) = 0.
///
/// The system is integrated in (v, w), w = |v'|^{p-2} v', from t = R down
/// to t = r with w(R) = 0, and tau is bisected on the sign of v over [r, R].
EigResult shell_eigen(const ShellSpec& spec, const ShellOptions& opts = {});

/// Monotone cubic Hermite interpolation of the stored profile.
double radial_profile_eval(const EigResult& res, double t);
double radial_profile_derivative(const EigResult& res, double t);

void write_profile_csv(std::ostream& os, const EigResult& res);

}  // namespace hyperrfk
