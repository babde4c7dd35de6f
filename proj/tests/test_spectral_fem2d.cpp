#include <doctest.h>

#include <numbers>
#include <sstream>

#include "hyperrfk/spectral_fem2d.hpp"
#include "hyperrfk/spectral_radial.hpp"
#include "oracles.hpp"

using namespace hyperrfk;
using std::numbers::pi;

namespace {

double shell_tau(double p, double r, double R) { return shell_eigen(ShellSpec(Dimension(2), p, r, R)).tau1; }

}  // namespace

TEST_CASE("conformal mass matrix reproduces the hyperbolic area") {
  const double exact = 2 * pi * (std::cosh(1.5) - std::cosh(0.5));
  const Mesh mesh = build_mesh(AnnularDomain2D::concentric(0.5, 1.5), 0.01);
  CHECK(oracle::rel_err(mesh_hyperbolic_area(mesh), exact) <= 1e-4);
  const std::vector<double> ones(mesh.num_vertices(), 1.0);
  CHECK(weighted_lp_integral(mesh, ones, 3.0) == doctest::Approx(mesh_hyperbolic_area(mesh)).epsilon(1e-12));

  // p = 2 energy is conformally invariant: for u = x it is the Euclidean area.
  std::vector<double> x(mesh.num_vertices());
  for (std::size_t v = 0; v < x.size(); ++v) x[v] = mesh.vertices[v].real();
  const double flat = pi * (std::pow(std::tanh(0.75), 2) - std::pow(std::tanh(0.25), 2));
  CHECK(oracle::rel_err(p_dirichlet_energy(mesh, x, 2.0), flat) <= 1e-4);
}

TEST_CASE("p = 2 annulus against the radial solver") {
  const double exact = shell_tau(2.0, 0.5, 1.5);
  const auto dom = AnnularDomain2D::concentric(0.5, 1.5);
  std::vector<double> tau;
  for (const double h : {0.04, 0.02, 0.01}) {
    const Mesh mesh = build_mesh(dom, h);
    const auto res = eigen_p2(mesh);
    CHECK(res.residual <= 1e-10);
    CHECK(res.constant_sign);
    CHECK(res.tau1 >= exact);  // conforming Rayleigh-Ritz
    for (std::size_t v = 0; v < mesh.num_vertices(); ++v)
      if (mesh.dirichlet[v]) CHECK(res.u[v] == 0.0);
    tau.push_back(res.tau1);
  }
  CHECK(oracle::rel_err(tau.back(), exact) <= 1e-3);
  const double d1 = tau[0] - tau[1], d2 = tau[1] - tau[2];
  CHECK(d1 > 0.0);
  CHECK(d1 / d2 >= 3.0);
}

TEST_CASE("isometry invariance") {
  const auto dom = AnnularDomain2D::offset_ball(0.5, 1.5, 0.2);
  const auto g = DiskIsometry::translation({-0.25, 0.4}).compose(DiskIsometry::rotation(1.1));
  const double a = eigen_p2(build_mesh(dom, 0.04)).tau1;
  const double b = eigen_p2(build_mesh(dom.moved(g), 0.04)).tau1;
  CHECK(oracle::rel_err(b, a) <= 1e-6);
}

TEST_CASE("eccentric hole lowers the eigenvalue") {
  const double annulus = eigen_p2(build_mesh(AnnularDomain2D::concentric(0.5, 1.5), 0.02)).tau1;
  const double shifted = eigen_p2(build_mesh(AnnularDomain2D::offset_ball(0.5, 1.5, 0.2), 0.02)).tau1;
  CHECK(shifted < annulus);
}

TEST_CASE("general p descent") {
  const Mesh mesh = build_mesh(AnnularDomain2D::concentric(0.5, 1.5), 0.04);
  const auto p2 = eigen_p2(mesh);
  const auto g2 = eigen_p_general(mesh, 2.0);
  CHECK(oracle::rel_err(g2.tau1, p2.tau1) <= 1e-4);

  for (const double p : {1.5, 3.0}) {
    const auto res = eigen_p_general(mesh, p);
    CAPTURE(p);
    CHECK(res.converged);
    CHECK(res.constant_sign);
    REQUIRE(res.start_values.size() == 2);
    CHECK(res.tau1 == std::min(res.start_values[0], res.start_values[1]));
    CHECK(oracle::rel_err(res.tau1, shell_tau(p, 0.5, 1.5)) <= 1e-2);
    // Discrete quotient of the returned field.
    CHECK(p_dirichlet_energy(mesh, res.u, p) / weighted_lp_integral(mesh, res.u, p) == doctest::Approx(res.tau1).epsilon(1e-10));
  }

  std::vector<double> ones(mesh.num_vertices(), 1.0);
  const auto from_const = eigen_p_general_from(mesh, 1.5, ones);
  CHECK(from_const.constant_sign);
  for (double x : from_const.u) CHECK(x >= 0.0);
  CHECK_THROWS_AS(eigen_p_general(mesh, 1.0), DomainError);
}

TEST_CASE("vertex CSV") {
  const Mesh mesh = build_mesh(AnnularDomain2D::concentric(0.5, 1.0), 0.1);
  const auto res = eigen_p2(mesh);
  std::ostringstream os;
  write_vertex_csv(os, mesh, res.u);
  const std::string s = os.str();
  CHECK(s.rfind("x,y,u\n", 0) == 0);
  CHECK(static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')) == mesh.num_vertices() + 1);
}
