#include <doctest.h>

#include <cmath>
#include <numbers>

#include "hyperrfk/errors.hpp"
#include "hyperrfk/insulation.hpp"
#include "oracles.hpp"

using namespace hyperrfk;
using std::numbers::pi;

namespace {

InsulationSpec body_spec(Body body, int n, double p, double delta, double beta) {
  InsulationSpec s;
  s.n = Dimension(n);
  s.p = p;
  s.body = std::move(body);
  s.delta = delta;
  s.beta = beta;
  return s;
}

}  // namespace

TEST_CASE("radial closed form") {
  CHECK(radial_energy_closed_form_2d(1.0, 1.0, 1.0) == doctest::Approx(8.1040322713167890).epsilon(1e-13));
  // c = beta / (1/sinh R + beta Q), Q = log(tanh(R/2) / tanh(r/2)), R = 2
  const double Q = std::log(std::tanh(1.0) / std::tanh(0.5));
  CHECK(radial_energy_closed_form_2d(1.0, 1.0, 1.0) == doctest::Approx(2 * pi / (1 / std::sinh(2.0) + Q)).epsilon(1e-14));
  CHECK(oracle::rel_err(radial_energy_exact(Dimension(2), 2.0, 1.0, 1.0, 1.0), radial_energy_closed_form_2d(1.0, 1.0, 1.0)) <=
        1e-13);
}

TEST_CASE("1-D minimizer against the closed form on a p = 2 grid") {
  for (const double r : {0.3, 1.0, 2.0})
    for (const double delta : {0.2, 1.0})
      for (const double beta : {0.1, 1.0, 10.0}) {
        const auto res = radial_energy(Dimension(2), 2.0, r, delta, beta);
        CHECK(oracle::rel_err(res.energy, radial_energy_closed_form_2d(r, delta, beta)) <= 1e-8);
        CHECK(res.flux_spread <= 1e-6);
      }
}

TEST_CASE("1-D minimizer for general n and p") {
  for (const int n : {2, 3, 4})
    for (const double p : {1.5, 2.0, 3.0}) {
      const auto res = radial_energy(Dimension(n), p, 0.7, 0.8, 2.0);
      CHECK(oracle::rel_err(res.energy, radial_energy_exact(Dimension(n), p, 0.7, 0.8, 2.0)) <= 1e-8);
      CHECK(res.energy_fine >= res.energy);  // conforming discretization
      CHECK(res.flux_spread <= 1e-6);
      // Profiles decrease from the Dirichlet value.
      CHECK(res.u.front() == 1.0);
      for (std::size_t i = 1; i < res.u.size(); ++i) CHECK(res.u[i] < res.u[i - 1]);
      // Robin relation at the outer radius: w |u'|^{p-1} = beta w u^{p-1}.
      const std::size_t N = res.u.size() - 1;
      const double slope = (res.u[N - 1] - res.u[N]) / (res.t[N] - res.t[N - 1]);
      CHECK(std::pow(slope, p - 1) == doctest::Approx(2.0 * std::pow(res.u[N], p - 1)).epsilon(1e-2));
    }
}

TEST_CASE("energy sweeps") {
  double prev = 0.0;
  for (const double beta : {1e-8, 1e-3, 0.1, 1.0, 10.0, 1e3, 1e6}) {
    const double E = radial_energy_exact(Dimension(2), 2.0, 1.0, 1.0, beta);
    CHECK(E >= prev);
    prev = E;
  }
  CHECK(radial_energy_exact(Dimension(2), 2.0, 1.0, 1.0, 1e-10) <= 1e-8);
  // beta -> inf: Dirichlet outer energy 2 pi / Q.
  const double Q = std::log(std::tanh(1.0) / std::tanh(0.5));
  CHECK(oracle::rel_err(prev, 2 * pi / Q) <= 1e-4);

  // Thickening decreases the energy only while beta > ((n-1) coth(R) / (p-1))^{p-1};
  // below that the growing outer surface wins (critical insulation radius).
  for (const int n : {2, 3})
    for (const double p : {1.5, 2.0, 3.0}) {
      const double crit = std::pow((n - 1) / std::tanh(1.0) / (p - 1), p - 1);
      double last = INFINITY;
      for (const double delta : {0.1, 0.3, 0.6, 1.0, 2.0}) {
        const double E = radial_energy_exact(Dimension(n), p, 1.0, delta, 1.5 * crit);
        CHECK(E <= last);
        last = E;
      }
      const double crit_far = std::pow((n - 1) / (p - 1), p - 1);  // coth R > 1 for every R
      last = 0.0;
      for (const double delta : {0.1, 0.3, 0.6, 1.0, 2.0}) {
        const double E = radial_energy_exact(Dimension(n), p, 1.0, delta, 0.9 * crit_far);
        CHECK(E >= last);
        last = E;
      }
    }
}

TEST_CASE("p = 2 FEM energy") {
  SUBCASE("ball hole matches the radial value") {
    const auto f = fem_energy_p2(Body2D::ball(1.0), 1.0, 1.0, 0.01);
    CHECK(oracle::rel_err(f.energy, radial_energy_closed_form_2d(1.0, 1.0, 1.0)) <= 1e-3);
    double umin = 1.0;
    for (double u : f.u) umin = std::min(umin, u);
    CHECK(umin > 0.0);
  }
  SUBCASE("beta = 0 gives the constant") {
    const auto f = fem_energy_p2(Body2D::ball(1.0), 1.0, 0.0, 0.05);
    CHECK(f.energy == doctest::Approx(0.0));
    for (double u : f.u) CHECK(u == 1.0);
  }
  SUBCASE("outer parallel curve lies at distance delta") {
    const Body2D hole(FourierSeries{0.8, {0.0, 0.1}, {}});
    const auto c = outer_parallel_curve(hole, 0.8);
    for (const double th : {0.0, 0.7, 1.6, 3.0}) {
      // The distance to the convex hole is attained at the foot point.
      CHECK(disk_distance(c(th), hole.chart_point(th)) == doctest::Approx(0.8).epsilon(1e-12));
      for (int k = 0; k < 64; ++k) CHECK(disk_distance(c(th), hole.chart_point(2 * pi * k / 64)) >= 0.8 - 1e-12);
    }
  }
  SUBCASE("FEM energy is below the parallel-coordinate bound") {
    const Body2D hole(FourierSeries{0.8, {0.0, 0.1}, {}});
    const auto prof = curvature_profile(Body(hole));
    const double ub = layer_energy_flux([&](double s) { return parallel_perimeter_direct(prof, s); }, 2.0, 0.8, 1.0);
    CHECK(fem_energy_p2(hole, 0.8, 1.0, 0.01).energy <= ub);
  }
}

TEST_CASE("parallel-coordinate bound is exact on balls") {
  for (const int n : {2, 3}) {
    const Body ball = n == 2 ? Body(Body2D::ball(0.9)) : Body(RevolutionBody::ball(Dimension(3), 0.9));
    const auto prof = curvature_profile(ball);
    for (const double p : {1.5, 2.0, 4.0}) {
      const double E = layer_energy_flux([&](double s) { return parallel_perimeter_direct(prof, s); }, p, 0.5, 3.0);
      CHECK(oracle::rel_err(E, radial_energy_exact(Dimension(n), p, 0.9, 0.5, 3.0)) <= 1e-9);
    }
  }
}

TEST_CASE("insulation verdicts") {
  SUBCASE("ball: equality") {
    InsulationSpec s;
    s.body = 1.2;
    const auto rep = insulation_verdict(s);
    CHECK(rep.margin == 0.0);
    CHECK(rep.equality_detected);
    CHECK(rep.verdict);
    const auto rep2 = insulation_verdict(body_spec(Body(Body2D::ball(1.2)), 2, 2.0, 1.0, 1.0));
    CHECK(rep2.equality_detected);
    CHECK(rep2.E_body == doctest::Approx(rep.E_body).epsilon(1e-12));
  }
  SUBCASE("convex non-ball holes in the plane") {
    for (const double eps : {0.05, 0.1}) {
      const auto rep = insulation_verdict(body_spec(Body(Body2D(FourierSeries{0.8, {0.0, eps}, {}})), 2, 2.0, 0.8, 1.0));
      CHECK(rep.method == "fem2d");
      CHECK(rep.margin > 0.0);
      CHECK(rep.verdict);
      CHECK_FALSE(rep.equality_detected);
      CHECK(oracle::rel_err(rep.E_ball, rep.E_ball_radial) <= 1e-3);
    }
    const auto p3 = insulation_verdict(body_spec(Body(Body2D(FourierSeries{0.8, {0.0, 0.1}, {}})), 2, 3.0, 0.8, 1.0));
    CHECK(p3.method == "parallel_bound");
    CHECK(p3.margin > 0.0);
  }
  SUBCASE("h-convex revolution bodies") {
    for (const double c : {0.05, 0.1}) {
      const auto rep = insulation_verdict(body_spec(Body(RevolutionBody(Dimension(3), 1.0, {c})), 3, 2.0, 0.8, 1.0));
      CHECK(rep.method == "parallel_bound");
      CHECK(rep.margin >= 0.0);
      CHECK(rep.verdict);
    }
  }
  SUBCASE("hypotheses and validation") {
    CHECK_THROWS_AS(insulation_verdict(body_spec(Body(RevolutionBody(Dimension(3), 2.0, {0.3})), 3, 2.0, 0.8, 1.0)),
                    PreconditionError);
    CHECK_THROWS_AS(insulation_verdict(body_spec(Body(Body2D::ball(1.0)), 3, 2.0, 0.8, 1.0)), DomainError);
    CHECK_THROWS_AS(insulation_verdict(body_spec(Body(Body2D::ball(1.0)), 2, 2.0, 0.0, 1.0)), DomainError);
    CHECK_THROWS_AS(insulation_verdict(body_spec(Body(Body2D::ball(1.0)), 2, 2.0, 1.0, -1.0)), DomainError);
    CHECK_THROWS_AS(insulation_verdict(body_spec(Body(Body2D::ball(1.0)), 2, 1.0, 1.0, 1.0)), DomainError);
  }
}
