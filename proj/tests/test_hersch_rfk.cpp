#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "hyperrfk/errors.hpp"
#include "hyperrfk/hersch_rfk.hpp"
#include "hyperrfk/spectral_fem2d.hpp"
#include "oracles.hpp"

using namespace hyperrfk;
using std::numbers::pi;

namespace {

AnnularDomain2D fourier_hole(double a0, double eps, double R) {
  return AnnularDomain2D{Body2D(FourierSeries{a0, {0.0, eps}, {}}), Body2D::ball(R), {}, {}};
}

struct Pipeline {
  DistanceField field;
  double r = 0.0, R = 0.0;
  ParallelTable table;
  InteriorCoords coords;
  EigResult shell;
  HerschBound hb;
};

Pipeline run(const AnnularDomain2D& dom, double p, int res = 1024) {
  auto field = distance_field(dom, res);
  const auto [r, R] = annulus_match(dom);
  auto table = parallel_table(dom, field, r);
  auto coords = interior_coords(table, p, R);
  auto shell = shell_eigen(ShellSpec(Dimension(2), p, r, R));
  const auto hb = hersch_bound(coords, shell);
  return {std::move(field), r, R, std::move(table), std::move(coords), std::move(shell), hb};
}

}  // namespace

TEST_CASE("distance field of the concentric annulus is radial") {
  const auto dom = AnnularDomain2D::concentric(0.5, 1.5);
  const auto f = distance_field(dom, 512);
  double worst = 0.0;
  int count = 0;
  for (int j = 0; j < f.res; ++j)
    for (int i = 0; i < f.res; ++i) {
      const double d = f.at(i, j);
      if (std::isnan(d) || !f.in_outer[static_cast<std::size_t>(j) * f.res + i] || d < 0.0) continue;
      worst = std::max(worst, std::abs(d - (disk_distance(f.node(i, j), 0.0) - 0.5)));
      ++count;
    }
  CHECK(count > 100000);
  CHECK(worst <= 1e-7);
  CHECK(f.delta0 == doctest::Approx(1.0).epsilon(1e-6));

  const HoleDistance dist(dom.inner);
  for (const double th : {0.0, 1.0, 2.5, 4.0})
    CHECK(std::abs(dist(std::polar(chart_radius(0.5), th))) <= 1e-7);
  CHECK(dist(0.0) == doctest::Approx(-0.5).epsilon(1e-8));
}

TEST_CASE("parallel lengths against closed forms") {
  SUBCASE("annulus") {
    const auto dom = AnnularDomain2D::concentric(0.5, 1.5);
    const auto f = distance_field(dom, 1024);
    CHECK(oracle::rel_err(parallel_length(dom, f, 0.5), 2 * pi * std::sinh(1.0)) <= 1e-3);
    CHECK(oracle::rel_err(parallel_length(dom, f, 0.0), 2 * pi * std::sinh(0.5)) <= 1e-3);
    // At delta0 the level set is the whole contact set Gamma_N.
    CHECK(oracle::rel_err(parallel_length(dom, f, f.delta0), 2 * pi * std::sinh(1.5)) <= 1e-3);
    CHECK_THROWS_AS(parallel_length(dom, f, f.delta0 + 0.1), DomainError);
  }
  SUBCASE("convex hole, parallel set strictly inside") {
    const auto dom = fourier_hole(0.5, 0.05, 1.5);
    const auto f = distance_field(dom, 1024);
    for (const double d : {0.1, 0.3, 0.6})
      CHECK(oracle::rel_err(parallel_length(dom, f, d), parallel_perimeter_direct(Body(dom.inner), d)) <= 1e-3);
  }
  SUBCASE("eccentric hole: L is dominated by P of the parallel set and by Ltilde") {
    const auto dom = AnnularDomain2D::offset_ball(0.5, 1.5, 0.2);
    const auto f = distance_field(dom, 1024);
    auto [r, R] = annulus_match(dom);
    const auto t = parallel_table(dom, f, r);
    for (std::size_t k = 0; k < t.deltas.size(); k += 8) {
      const double pk = 2 * pi * std::sinh(0.5 + t.deltas[k]);
      CHECK(t.L[k] <= pk * (1 + 1e-4));
      CHECK(t.L[k] <= t.Ltilde[k] * (1 + 1e-4));
    }
    // Once the parallel set leaves Omega_N the level set is a proper arc.
    CHECK(t.L.back() < 0.5 * 2 * pi * std::sinh(0.5 + t.deltas.back()));
    CHECK(parallel_length(dom, f, f.delta0) <= 0.05);
  }
}

TEST_CASE("interior coordinates") {
  SUBCASE("annulus: M and Mtilde coincide") {
    const auto dom = AnnularDomain2D::concentric(0.5, 1.5);
    const auto f = distance_field(dom, 1024);
    const auto t = parallel_table(dom, f, 0.5);
    for (const double p : {1.5, 2.0, 3.0}) {
      const auto c = interior_coords(t, p, 1.5);
      for (std::size_t k = 1; k < t.deltas.size(); k += 16) CHECK(oracle::rel_err(c.M[k], c.mtilde(t.deltas[k])) <= 1e-3);
      CHECK(oracle::rel_err(c.M_star, c.Mtilde_star) <= 1e-3);
    }
  }
  SUBCASE("Mtilde closed form at p = 2 and its inverse") {
    const auto dom = AnnularDomain2D::concentric(0.5, 1.5);
    const auto t = parallel_table(dom, distance_field(dom, 256), 0.5);
    const auto c = interior_coords(t, 2.0, 1.5);
    for (const double s : {0.01, 0.2, 0.7, 1.0}) {
      const double exact = std::log(std::tanh((0.5 + s) / 2) / std::tanh(0.25)) / (2 * pi);
      CHECK(oracle::rel_err(c.mtilde(s), exact) <= 1e-12);
      CHECK(c.mtilde_inverse(exact) == doctest::Approx(s).epsilon(1e-10));
    }
  }
  SUBCASE("eccentric hole: Mtilde <= M, both increasing") {
    const auto dom = AnnularDomain2D::offset_ball(0.5, 1.5, 0.2);
    auto [r, R] = annulus_match(dom);
    const auto t = parallel_table(dom, distance_field(dom, 512), r);
    for (const double p : {1.5, 2.0, 4.0}) {
      const auto c = interior_coords(t, p, R);
      for (std::size_t k = 1; k < c.M.size(); ++k) {
        CHECK(c.M[k] > c.M[k - 1]);
        CHECK(c.mtilde(c.deltas[k]) <= c.M[k] * (1 + 1e-6));
      }
      CHECK(c.Mtilde_star <= c.M_star);
      CHECK(c.m_inverse(c.m(0.37)) == doctest::Approx(0.37).epsilon(1e-9));
    }
  }
  SUBCASE("constant length gives a linear M") {
    ParallelTable t;
    for (int k = 0; k <= 100; ++k) {
      t.deltas.push_back(0.01 * k);
      t.L.push_back(3.0);
      t.Ltilde.push_back(2 * pi * std::sinh(0.5 + 0.01 * k));
    }
    t.delta0 = 1.0;
    t.r = 0.5;
    const auto c = interior_coords(t, 2.0, 1.5);
    for (std::size_t k = 0; k < c.M.size(); k += 10) CHECK(c.M[k] == doctest::Approx(t.deltas[k] / 3.0).epsilon(1e-12));
    const auto c3 = interior_coords(t, 3.0, 1.5);
    CHECK(c3.M.back() == doctest::Approx(std::pow(3.0, -0.5)).epsilon(1e-12));
  }
  SUBCASE("vanishing length inside the table") {
    ParallelTable t;
    t.deltas = {0.0, 0.5, 1.0};
    t.L = {1.0, 0.0, 1.0};
    t.Ltilde = {1.0, 1.0, 1.0};
    t.delta0 = 1.0;
    t.r = 0.5;
    CHECK_THROWS_AS(interior_coords(t, 2.0, 1.5), DataError);
  }
}

TEST_CASE("annulus matching") {
  auto [r, R] = annulus_match(AnnularDomain2D::concentric(0.5, 1.5));
  CHECK(r == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(R == doctest::Approx(1.5).epsilon(1e-6));

  const auto dom = fourier_hole(0.8, 0.1, 1.8);
  std::tie(r, R) = annulus_match(dom);
  CHECK(r > 0.7);  // hole inradius about its centre
  CHECK(std::sinh(r) * 2 * pi == doctest::Approx(boundary_measures(Body(dom.inner)).perimeter).epsilon(1e-12));
  const double area = 2 * pi * (std::cosh(1.8) - 1) - boundary_measures(Body(dom.inner)).volume;
  CHECK(oracle::rel_err(2 * pi * (std::cosh(R) - std::cosh(r)), area) <= 1e-6);
}

TEST_CASE("Hersch bound reduces to the annulus eigenvalue") {
  const auto s = run(AnnularDomain2D::concentric(0.5, 1.5), 2.0);
  CHECK(oracle::rel_err(s.hb.bound, s.shell.tau1) <= 1e-3);
  CHECK(oracle::rel_err(s.hb.numerator_beta, s.hb.numerator) <= 1e-4);
  CHECK(oracle::rel_err(s.hb.numerator / s.hb.annulus_denominator, s.shell.tau1) <= 1e-6);
  CHECK(s.hb.terminal_gap <= 1e-3);
  CHECK(s.hb.max_g_excess <= 1e-4);
  CHECK(std::abs(s.R - s.r - s.field.delta0) <= 2 * s.field.cell * s.field.lambda_max);
}

TEST_CASE("eccentric annulus: chain, Lemma suite and the coarea denominator") {
  const auto dom = AnnularDomain2D::offset_ball(0.5, 1.5, 0.2);
  const auto s = run(dom, 2.0);
  const Mesh mesh = build_mesh(dom, 0.01);
  const auto fem = eigen_p2(mesh);
  CHECK(fem.tau1 < s.hb.bound);
  CHECK(s.hb.bound < s.shell.tau1);
  CHECK(oracle::rel_err(s.hb.numerator_beta, s.hb.numerator) <= 1e-4);

  // Lemma (i): strict for non-annuli.
  CHECK(s.R - s.r < s.field.delta0 - 0.05);
  // Lemma (ii) and the strict terminal gap.
  CHECK(s.hb.max_g_excess <= 1e-4);
  CHECK(s.hb.terminal_gap > 0.1);

  // Denominator against direct 2-D integration of u on the mesh.
  const HoleDistance dist(dom.inner);
  const auto& c = s.coords;
  std::vector<double> u(mesh.num_vertices());
  for (std::size_t v = 0; v < u.size(); ++v) {
    const double d = std::max(dist(mesh.vertices[v]), 0.0);
    const double beta = std::min(c.m(std::min(d, c.table.delta0)), c.Mtilde_star);
    u[v] = radial_profile_eval(s.shell, std::min(c.r + c.mtilde_inverse(beta), c.R));
  }
  CHECK(oracle::rel_err(weighted_lp_integral(mesh, u, 2.0), s.hb.denominator) <= 1e-3);
}

TEST_CASE("general p: bound below the annulus value") {
  for (const double p : {1.5, 3.0}) {
    const auto s = run(fourier_hole(0.5, 0.1, 1.5), p, 512);
    CHECK(s.hb.bound < s.shell.tau1);
    CHECK(oracle::rel_err(s.hb.numerator_beta, s.hb.numerator) <= 1e-4);
    CHECK(s.hb.max_g_excess <= 1e-4);
  }
}

TEST_CASE("reverse Faber-Krahn verdicts") {
  const auto ann = rfk_verdict(AnnularDomain2D::concentric(0.5, 1.5), 2.0);
  CHECK(ann.chain_ok);
  CHECK(ann.equality_detected);
  CHECK(ann.lemma_i_ok);
  CHECK(ann.lemma_ii_ok);

  const auto ecc = rfk_verdict(AnnularDomain2D::offset_ball(0.5, 1.5, 0.1), 2.0);
  CHECK(ecc.chain_ok);
  CHECK_FALSE(ecc.equality_detected);
  CHECK(ecc.tau_omega < ecc.tau_annulus);

  const auto conv = rfk_verdict(fourier_hole(0.8, 0.1, 1.8), 2.0);
  CHECK(conv.chain_ok);
  CHECK_FALSE(conv.equality_detected);
  CHECK(conv.lemma_i_ok);
  CHECK(conv.lemma_ii_ok);
}

TEST_CASE("non-convex hole is refused") {
  const auto dom = fourier_hole(0.5, 0.0, 1.5);
  AnnularDomain2D bad{Body2D(FourierSeries{0.5, {0.0, 0.0, 0.0, 0.12}, {}}), Body2D::ball(1.5), {}, {}};
  REQUIRE_FALSE(convexity_report(Body(bad.inner)).is_convex);
  CHECK_THROWS_AS(distance_field(bad, 64), PreconditionError);
  CHECK_THROWS_AS(annulus_match(bad), PreconditionError);
  CHECK_NOTHROW(distance_field(dom, 64));
}

TEST_CASE("parallel table CSV") {
  const auto dom = AnnularDomain2D::concentric(0.5, 1.5);
  const auto t = parallel_table(dom, distance_field(dom, 128), 0.5, 17);
  const auto c = interior_coords(t, 2.0, 1.5);
  std::ostringstream os;
  write_parallel_table_csv(os, t, &c);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "delta,L,Ltilde,M,Mtilde");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 17);
}
