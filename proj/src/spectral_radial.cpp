#include "hyperrfk/spectral_radial.hpp"
#include "hyperrfk/format.hpp"

#include <algorithm>
#include <array>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <ostream>

namespace hyperrfk {

namespace odeint = boost::numeric::odeint;

ShellSpec::ShellSpec(Dimension n_, double p_, double r_, double R_) : n(n_), p(p_), r(r_), R(R_) {
  if (!(p > 1.0) || !std::isfinite(p)) throw DomainError("p must lie in (1, inf)");
  if (!(r > 0.0)) throw DomainError("inner radius must be positive");
  if (!(R > r) || !std::isfinite(R)) throw DomainError("outer radius must exceed inner radius");
}

namespace {

// v, w, and the two Rayleigh integrals (weight scaled by sinh^{n-1} R)
using State = std::array<double, 4>;

double phi(double x, double q) { return std::copysign(std::pow(std::abs(x), q - 1.0), x); }

struct Rhs {
  int n;
  double p, pc, tau, log_sinh_R;

  void operator()(const State& x, State& dx, double t) const {
    const double s = std::exp((n - 1) * (log_sinh(t) - log_sinh_R));
    dx[0] = phi(x[1], pc);
    dx[1] = -(n - 1) * x[1] / std::tanh(t) - tau * phi(x[0], p);
    dx[2] = s * std::pow(std::abs(x[1]), pc);
    dx[3] = s * std::pow(std::abs(x[0]), p);
  }
};

struct Shot {
  bool positive = false;  // v > 0 on [r, R]
  double v_inner = 0.0;
  State end{};
  long steps = 0;
  RadialProfile profile;
};

Shot shoot(const ShellSpec& spec, double tau, const ShellOptions& opts, double ode_tol, bool record) {
  const Rhs rhs{spec.n, spec.p, spec.conjugate(), tau, log_sinh(spec.R)};
  auto stepper = odeint::make_dense_output(ode_tol, ode_tol, odeint::runge_kutta_dopri5<State>());
  const double len = spec.R - spec.r;
  stepper.initialize(State{opts.amplitude, 0.0, 0.0, 0.0}, spec.R, -len * 1e-4);

  Shot out;
  const int m = opts.samples;
  if (record) {
    out.profile.t.resize(m);
    out.profile.v.resize(m);
    out.profile.dv.resize(m);
  }
  int next = m - 1;  // next sample index to fill, walking downwards
  auto sample_time = [&](int k) { return k == 0 ? spec.r : (k == m - 1 ? spec.R : spec.r + len * k / (m - 1)); };

  State x;
  while (true) {
    const double t_prev = stepper.current_time();
    stepper.do_step(rhs);
    ++out.steps;
    const double t_now = std::max(stepper.current_time(), spec.r);
    if (record) {
      while (next >= 0 && sample_time(next) >= t_now && sample_time(next) <= t_prev) {
        const double ts = sample_time(next);
        if (ts == spec.R) {
          x = State{opts.amplitude, 0.0, 0.0, 0.0};
        } else {
          stepper.calc_state(ts, x);
        }
        out.profile.t[next] = ts;
        out.profile.v[next] = x[0];
        out.profile.dv[next] = phi(x[1], spec.conjugate());
        --next;
      }
    }
    if (stepper.current_time() <= spec.r) {
      stepper.calc_state(spec.r, x);
      out.end = x;
      out.v_inner = x[0];
      out.positive = x[0] > 0.0;
      return out;
    }
    if (stepper.current_state()[0] <= 0.0) {
      out.end = stepper.current_state();
      out.v_inner = out.end[0];
      out.positive = false;
      return out;
    }
  }
}

}  // namespace

EigResult shell_eigen(const ShellSpec& spec, const ShellOptions& opts) {
  if (opts.samples < 8) throw PreconditionError("at least 8 profile samples are required");
  if (!(opts.amplitude > 0.0)) throw PreconditionError("amplitude must be positive");

  const double len = spec.R - spec.r;
  const double tau_e = std::pow(M_PI / (2.0 * len), 2);
  constexpr double tau_cap = 1e12;
  long steps = 0;
  auto positive = [&](double tau) {
    const Shot s = shoot(spec, tau, opts, opts.ode_tol, false);
    steps += s.steps;
    return s.positive;
  };

  double lo = 0.5 * tau_e, hi = 4.0 * tau_e;
  while (!positive(lo)) {
    hi = lo;
    lo *= 0.5;
    if (lo < 1e-300) throw SearchError("no positive lower bracket for tau");
  }
  while (positive(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > tau_cap) throw SearchError("no sign change of v(r) for tau up to " + fmt_double(tau_cap, 6));
  }

  int it = 0;
  while (hi - lo > opts.tol * hi) {
    if (++it > opts.max_iter) throw IterationLimitError("tau bisection did not converge", 0.5 * (lo + hi));
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (positive(mid) ? lo : hi) = mid;
  }

  // The lower end keeps v > 0, so the recorded profile is on the first branch.
  Shot fin = shoot(spec, lo, opts, opts.ode_tol, true);
  steps += fin.steps;
  if (!fin.positive) throw NumericError("final profile changes sign; wrong branch");
  const auto& v = fin.profile.v;
  for (std::size_t k = 1; k < v.size(); ++k)
    if (!(v[k] > 0.0)) throw NumericError("interior zero in the eigenfunction profile");

  const Shot ref = shoot(spec, lo, opts, opts.ode_tol * 1e-2, true);
  double ode_max = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) ode_max = std::max(ode_max, std::abs(v[k] - ref.profile.v[k]));

  EigResult res{spec, lo, std::move(fin.profile), {}, 0.0, it, steps};
  res.residuals.bc_inner = std::abs(fin.v_inner) / opts.amplitude;
  res.residuals.bc_outer = 0.0;
  res.residuals.ode_max = ode_max / opts.amplitude;
  res.rayleigh = fin.end[2] / fin.end[3];
  return res;
}

namespace {

struct Hermite {
  double t0, h, y0, y1, m0, m1;
};

Hermite locate(const EigResult& res, double t) {
  const auto& pr = res.profile;
  if (!(t >= pr.t.front() && t <= pr.t.back())) throw DomainError("t outside [r, R]");
  auto it = std::upper_bound(pr.t.begin(), pr.t.end(), t);
  std::size_t k = static_cast<std::size_t>(std::distance(pr.t.begin(), it));
  k = std::clamp<std::size_t>(k, 1, pr.t.size() - 1) - 1;
  const double h = pr.t[k + 1] - pr.t[k];
  double m0 = pr.dv[k], m1 = pr.dv[k + 1];
  // Fritsch-Carlson limiter on the exact slopes.
  const double d = (pr.v[k + 1] - pr.v[k]) / h;
  if (d <= 0.0) {
    m0 = m1 = 0.0;
  } else {
    const double a = m0 / d, b = m1 / d;
    const double s = a * a + b * b;
    if (s > 9.0) {
      const double tau = 3.0 / std::sqrt(s);
      m0 = tau * a * d;
      m1 = tau * b * d;
    }
  }
  return {pr.t[k], h, pr.v[k], pr.v[k + 1], m0, m1};
}

}  // namespace

double radial_profile_eval(const EigResult& res, double t) {
  const Hermite c = locate(res, t);
  const double s = (t - c.t0) / c.h;
  const double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * c.y0 + (s3 - 2 * s2 + s) * c.h * c.m0 + (-2 * s3 + 3 * s2) * c.y1 +
         (s3 - s2) * c.h * c.m1;
}

double radial_profile_derivative(const EigResult& res, double t) {
  const Hermite c = locate(res, t);
  const double s = (t - c.t0) / c.h;
  const double s2 = s * s;
  return ((6 * s2 - 6 * s) * c.y0 + (-6 * s2 + 6 * s) * c.y1) / c.h + (3 * s2 - 4 * s + 1) * c.m0 +
         (3 * s2 - 2 * s) * c.m1;
}

void write_profile_csv(std::ostream& os, const EigResult& res) {
  os << "t,v,dv\n";
  const auto& pr = res.profile;
  for (std::size_t k = 0; k < pr.t.size(); ++k) os << fmt_double(pr.t[k]) << ',' << fmt_double(pr.v[k]) << ',' << fmt_double(pr.dv[k]) << '\n';
}

}  // namespace hyperrfk
