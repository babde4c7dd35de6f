#include "hyperrfk/selftest.hpp"

#include <cmath>
#include <exception>
#include <functional>
#include <numbers>
#include <random>

#include "hyperrfk/format.hpp"
#include "hyperrfk/hersch_rfk.hpp"
#include "hyperrfk/insulation.hpp"
#include "hyperrfk/nagy.hpp"
#include "hyperrfk/spectral_fem2d.hpp"
#include "hyperrfk/spectral_radial.hpp"

namespace hyperrfk {

namespace {

using std::numbers::pi;

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

std::string sci(double x) { return fmt_double(x, 3); }

SelftestCheck guarded(const std::string& name, const std::function<SelftestCheck()>& f) {
  try {
    SelftestCheck c = f();
    c.name = name;
    return c;
  } catch (const std::exception& e) {
    return {name, false, std::string("exception: ") + e.what()};
  }
}

SelftestCheck ball_oracles() {
  double worst = rel(ball_volume(Dimension(2), 1.0), 2 * pi * (std::cosh(1.0) - 1));
  worst = std::max(worst, rel(ball_perimeter(Dimension(2), 1.0), 2 * pi * std::sinh(1.0)));
  worst = std::max(worst, rel(ball_perimeter(Dimension(3), 1.0), 4 * pi * std::pow(std::sinh(1.0), 2)));
  for (int n = 2; n <= 5; ++n)
    for (double r = 0.1; r <= 4.0 + 1e-12; r += 0.3) {
      const double wn = sphere_measure(n - 1) / n;
      worst = std::max(worst, rel(ball_quermass(Dimension(n), r)[n], wn));
    }
  return {"", worst <= 1e-10, "max rel err " + sci(worst)};
}

std::vector<Body> convex_plane_suite() {
  return {Body(Body2D(FourierSeries{0.8, {0.0, 0.1}, {}})), Body(Body2D(FourierSeries{1.0, {0.0, 0.05}, {0.0, 0.0, 0.02}})),
          Body(Body2D(FourierSeries{0.6, {0.0, 0.0, 0.03}, {}}))};
}

std::vector<Body> hconvex_revolution_suite() {
  return {Body(RevolutionBody(Dimension(3), 1.0, {0.05})), Body(RevolutionBody(Dimension(3), 1.0, {0.1})),
          Body(RevolutionBody(Dimension(4), 1.2, {0.05}))};
}

SelftestCheck steiner() {
  double worst = 0.0;
  auto bodies = convex_plane_suite();
  for (auto& b : hconvex_revolution_suite()) bodies.push_back(b);
  for (const auto& b : bodies) {
    const auto ci = curvature_integrals(b);
    const auto prof = curvature_profile(b);
    for (double d = 0.0; d <= 2.0; d += 0.25) worst = std::max(worst, rel(steiner_evaluate(ci, d), parallel_perimeter_direct(prof, d)));
  }
  return {"", worst <= 1e-8, "max rel gap " + sci(worst)};
}

SelftestCheck isoperimetric() {
  std::mt19937 rng(12345);
  std::uniform_real_distribution<double> a0(0.3, 2.0), c(-0.08, 0.08);
  double worst = INFINITY;
  for (int k = 0; k < 20; ++k) {
    FourierSeries fsr{a0(rng), {}, {}};
    for (int m = 0; m < 4; ++m) {
      fsr.cos_coeffs.push_back(c(rng) * fsr.a0);
      fsr.sin_coeffs.push_back(c(rng) * fsr.a0);
    }
    const Body2D b(fsr);
    const double P = boundary_measures(Body(b)).perimeter;
    worst = std::min(worst, isoperimetric_check_2d(b) / (P * P));
  }
  const double ball = std::abs(isoperimetric_check_2d(Body2D::ball(1.3)));
  return {"", worst >= 0.0 && ball <= 1e-9 * std::pow(2 * pi * std::sinh(1.3), 2),
          "min deficit/P^2 " + sci(worst) + ", ball " + sci(ball)};
}

SelftestCheck alexandrov_fenchel() {
  double worst = INFINITY;
  for (const auto& b : hconvex_revolution_suite()) {
    const int n = body_dimension(b);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) worst = std::min(worst, af_check(b, i, j));
  }
  return {"", worst >= -1e-8, "min margin " + sci(worst)};
}

SelftestCheck nagy() {
  bool ok = true;
  const auto deltas = default_delta_grid();
  auto bodies = convex_plane_suite();
  for (auto& b : hconvex_revolution_suite()) bodies.push_back(b);
  for (const auto& b : bodies) {
    const auto rep = nagy_table(b, deltas);
    ok = ok && rep.verdict && !rep.equality_detected;
  }
  const auto ball = nagy_table(Body(RevolutionBody::ball(Dimension(3), 0.9)), deltas);
  ok = ok && ball.verdict && ball.equality_detected;
  return {"", ok, ok ? "all margins nonnegative, equality on the ball only" : "margin or equality flag wrong"};
}

SelftestCheck cross_solver() {
  const double tau = shell_eigen(ShellSpec(Dimension(2), 2.0, 0.5, 1.5)).tau1;
  const auto fem = eigen_p2(build_mesh(AnnularDomain2D::concentric(0.5, 1.5), 0.02));
  const double e = rel(fem.tau1, tau);
  return {"", e <= 1e-3 && fem.tau1 >= tau, "rel gap " + sci(e) + " at h = 0.02"};
}

SelftestCheck rfk_chain() {
  RFKOptions o;
  o.h_mesh = 0.02;
  o.grid_res = 512;
  const auto ann = rfk_verdict(AnnularDomain2D::concentric(0.5, 1.5), 2.0, o);
  const auto ecc = rfk_verdict(AnnularDomain2D::offset_ball(0.5, 1.5, 0.2), 2.0, o);
  const bool ok = ann.chain_ok && ann.equality_detected && ecc.chain_ok && !ecc.equality_detected;
  return {"", ok, "eccentric: " + sci(ecc.tau_omega) + " <= " + sci(ecc.hersch_bound) + " <= " + sci(ecc.tau_annulus)};
}

SelftestCheck lemma_suite() {
  const auto dom = AnnularDomain2D{Body2D(FourierSeries{0.5, {0.0, 0.1}, {}}), Body2D::ball(1.5), {}, {}};
  const auto f = distance_field(dom, 512);
  const auto [r, R] = annulus_match(dom);
  const auto c = interior_coords(parallel_table(dom, f, r), 2.0, R);
  const auto hb = hersch_bound(c, shell_eigen(ShellSpec(Dimension(2), 2.0, r, R)));
  const bool ok = R - r <= f.delta0 + 2 * f.cell * f.lambda_max && hb.max_g_excess <= 1e-4 && hb.terminal_gap > 0.0;
  return {"", ok, "delta0 - (R - r) = " + sci(f.delta0 - (R - r)) + ", terminal gap " + sci(hb.terminal_gap)};
}

SelftestCheck insulation() {
  const double e = rel(radial_energy(Dimension(2), 2.0, 1.0, 1.0, 1.0).energy, radial_energy_closed_form_2d(1.0, 1.0, 1.0));
  InsulationSpec s;
  s.body = Body(RevolutionBody(Dimension(3), 1.0, {0.1}));
  s.n = Dimension(3);
  s.delta = 0.8;
  const auto rep = insulation_verdict(s);
  return {"", e <= 1e-8 && rep.verdict, "1-D vs closed form " + sci(e) + ", revolution margin " + sci(rep.margin)};
}

SelftestCheck solver_structure() {
  bool ok = true;
  for (int n : {2, 3})
    for (double p : {1.5, 2.0, 4.0}) {
      const auto e = shell_eigen(ShellSpec(Dimension(n), p, 0.5, 1.5));
      ok = ok && e.residuals.bc_inner <= 1e-12 && e.residuals.bc_outer <= 1e-10;
      for (std::size_t i = 1; i < e.profile.v.size(); ++i) ok = ok && e.profile.v[i] >= e.profile.v[i - 1];
    }
  ok = ok && eigen_p2(build_mesh(AnnularDomain2D::offset_ball(0.5, 1.5, 0.2), 0.04)).constant_sign;
  return {"", ok, ok ? "profiles monotone, boundary conditions met" : "structure violated"};
}

}  // namespace

std::vector<SelftestCheck> run_selftest() {
  return {guarded("ball oracles", ball_oracles),
          guarded("steiner consistency", steiner),
          guarded("isoperimetric deficit", isoperimetric),
          guarded("alexandrov-fenchel", alexandrov_fenchel),
          guarded("nagy", nagy),
          guarded("shell vs fem", cross_solver),
          guarded("reverse faber-krahn chain", rfk_chain),
          guarded("parallel lemma", lemma_suite),
          guarded("insulation", insulation),
          guarded("solver structure", solver_structure)};
}

}  // namespace hyperrfk
