#include <doctest.h>

#include <sstream>

#include "hyperrfk/spectral_radial.hpp"
#include "oracles.hpp"

using namespace hyperrfk;

namespace {

void check_structure(const EigResult& res) {
  const auto& pr = res.profile;
  CHECK(res.tau1 > 0.0);
  CHECK(pr.t.front() == res.spec.r);
  CHECK(pr.t.back() == res.spec.R);
  CHECK(std::abs(pr.v.front()) <= 1e-12 * pr.v.back());
  CHECK(std::abs(pr.dv.back()) <= 1e-10);
  CHECK(res.residuals.bc_outer <= 1e-10);
  for (std::size_t k = 1; k < pr.t.size(); ++k) {
    CHECK(pr.v[k] > 0.0);
    CHECK(pr.v[k] >= pr.v[k - 1]);
    CHECK(pr.dv[k] >= 0.0);
  }
  CHECK(*std::max_element(pr.v.begin(), pr.v.end()) == pr.v.back());
}

double rayleigh_oracle(const EigResult& res) {
  const auto& s = res.spec;
  const double p = s.p;
  auto w = [&](double t) { return std::pow(std::sinh(t), s.n - 1); };
  const double num = oracle::simpson([&](double t) { return w(t) * std::pow(std::abs(radial_profile_derivative(res, t)), p); }, s.r, s.R);
  const double den = oracle::simpson([&](double t) { return w(t) * std::pow(std::abs(radial_profile_eval(res, t)), p); }, s.r, s.R);
  return num / den;
}

}  // namespace

TEST_CASE("shell spec validation") {
  CHECK_THROWS_AS(ShellSpec(Dimension(2), 1.0, 0.5, 1.5), DomainError);
  CHECK_THROWS_AS(ShellSpec(Dimension(2), 2.0, 0.0, 1.5), DomainError);
  CHECK_THROWS_AS(ShellSpec(Dimension(2), 2.0, 1.5, 1.5), DomainError);
  CHECK(ShellSpec(Dimension(3), 3.0, 0.2, 1.0).conjugate() == doctest::Approx(1.5));
}

TEST_CASE("p = 2 against finite differences") {
  const auto res = shell_eigen(ShellSpec(Dimension(2), 2.0, 0.5, 1.5));
  CHECK(res.tau1 == doctest::Approx(1.3576021911843).epsilon(1e-11));  // regression
  CHECK(oracle::rel_err(res.tau1, oracle::fd_shell_p2_extrapolated(2, 0.5, 1.5, 2000)) <= 1e-6);
  check_structure(res);

  const auto r4 = shell_eigen(ShellSpec(Dimension(4), 2.0, 0.7, 2.2));
  CHECK(oracle::rel_err(r4.tau1, oracle::fd_shell_p2_extrapolated(4, 0.7, 2.2, 2000)) <= 1e-6);
}

TEST_CASE("n = 3, p = 2 against the trigonometric reduction") {
  struct Case { double r, R; };
  for (const Case c : {Case{0.3, 1.3}, Case{0.5, 0.9}, Case{0.2, 3.0}, Case{1.0, 4.0}}) {
    const auto res = shell_eigen(ShellSpec(Dimension(3), 2.0, c.r, c.R));
    CHECK(oracle::rel_err(res.tau1, oracle::shell_tau_n3(c.r, c.R)) <= 1e-10);
  }
}

TEST_CASE("profile structure across n and p") {
  struct Case { int n; double p, r, R; };
  for (const Case c : {Case{2, 2.0, 0.5, 1.5}, Case{3, 1.5, 0.3, 1.3}, Case{2, 3.0, 0.5, 1.5}, Case{2, 1.2, 0.1, 2.5},
                       Case{4, 4.0, 1.0, 2.0}, Case{5, 1.7, 0.4, 3.0}, Case{2, 2.0, 0.5, 10.0}}) {
    CAPTURE(c.n);
    CAPTURE(c.p);
    const auto res = shell_eigen(ShellSpec(Dimension(c.n), c.p, c.r, c.R));
    check_structure(res);
    CHECK(res.residuals.ode_max <= 1e-8);
    CHECK(oracle::rel_err(res.rayleigh, res.tau1) <= 1e-8);
  }
}

TEST_CASE("Rayleigh quotient of the interpolated profile") {
  for (const double p : {1.5, 2.0, 3.0}) {
    const auto res = shell_eigen(ShellSpec(Dimension(3), p, 0.3, 1.3));
    CHECK(oracle::rel_err(rayleigh_oracle(res), res.tau1) <= 1e-6);
  }
}

TEST_CASE("homogeneity") {
  const ShellSpec spec(Dimension(2), 2.5, 0.4, 1.6);
  const auto a = shell_eigen(spec);
  ShellOptions opts;
  opts.amplitude = 7.5;
  const auto b = shell_eigen(spec, opts);
  CHECK(oracle::rel_err(b.tau1, a.tau1) <= 1e-12);
  for (std::size_t k = 0; k < a.profile.v.size(); k += 37) CHECK(b.profile.v[k] == doctest::Approx(7.5 * a.profile.v[k]).epsilon(1e-9));
}

TEST_CASE("interpolation") {
  const auto res = shell_eigen(ShellSpec(Dimension(3), 1.5, 0.3, 1.3));
  CHECK(radial_profile_eval(res, 0.3) == res.profile.v.front());
  CHECK(radial_profile_eval(res, 1.3) == res.profile.v.back());
  CHECK(radial_profile_eval(res, res.profile.t[100]) == res.profile.v[100]);
  CHECK_THROWS_AS(radial_profile_eval(res, 0.29), DomainError);
  CHECK_THROWS_AS(radial_profile_eval(res, 1.31), DomainError);

  ShellOptions fine;
  fine.samples = 2 * res.profile.t.size() - 1;
  fine.ode_tol = 1e-13;
  const auto ref = shell_eigen(res.spec, fine);
  double worst = 0.0, prev = 0.0;
  for (std::size_t k = 0; k + 1 < res.profile.t.size(); ++k) {
    const double mid = ref.profile.t[2 * k + 1];
    const double v = radial_profile_eval(res, mid);
    worst = std::max(worst, std::abs(v - ref.profile.v[2 * k + 1]) / ref.profile.v.back());
    CHECK(v >= prev);
    prev = v;
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("outer radius sweep (regression trend)") {
  double prev = 1e300;
  for (const double R : {1.0, 1.5, 2.0}) {
    const double tau = shell_eigen(ShellSpec(Dimension(2), 2.0, 0.5, R)).tau1;
    CHECK(tau < prev);
    prev = tau;
  }
}

TEST_CASE("profile CSV") {
  ShellOptions opts;
  opts.samples = 16;
  const auto res = shell_eigen(ShellSpec(Dimension(2), 2.0, 0.5, 1.5), opts);
  std::ostringstream os;
  write_profile_csv(os, res);
  const std::string s = os.str();
  CHECK(s.rfind("t,v,dv\n", 0) == 0);
  CHECK(std::count(s.begin(), s.end(), '\n') == 17);
}
