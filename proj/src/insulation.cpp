#include "hyperrfk/insulation.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <numbers>

#include "hyperrfk/errors.hpp"
#include "hyperrfk/hyperbolic_core.hpp"
#include "hyperrfk/nagy.hpp"

namespace hyperrfk {

using std::numbers::pi;

void InsulationSpec::validate() const {
  if (!(p > 1.0)) throw DomainError("p must lie in (1, inf)");
  if (!(delta > 0.0)) throw DomainError("delta must be positive");
  if (!(beta > 0.0)) throw DomainError("beta must be positive");
  if (const double* r = std::get_if<double>(&body)) {
    if (!(*r > 0.0)) throw DomainError("ball radius must be positive");
  } else if (body_dimension(std::get<Body>(body)) != n.value()) {
    throw DomainError("body dimension does not match n");
  }
}

double layer_energy_flux(const std::function<double(double)>& weight, double p, double delta, double beta) {
  if (!(p > 1.0) || !(delta > 0.0) || !(beta >= 0.0)) throw DomainError("invalid layer parameters");
  if (beta == 0.0) return 0.0;
  const double q = 1.0 / (p - 1.0);
  auto f = [&](double s) { return std::pow(weight(s), -q); };
  const double I = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, delta, 12, 1e-14);
  const double wd = weight(delta);
  if (p == 2.0) return beta * wd / (1.0 + beta * wd * I);
  // K = beta w(delta) g(delta)^{p-1}, g(delta) = 1 - K^{1/(p-1)} I.
  auto F = [&](double K) { return K - beta * wd * std::pow(std::max(1.0 - std::pow(K, q) * I, 0.0), p - 1.0); };
  const double hi = std::min(beta * wd, std::pow(I, 1.0 - p));
  std::uintmax_t it = 200;
  const auto br = boost::math::tools::toms748_solve(F, 0.0, hi, F(0.0), F(hi), boost::math::tools::eps_tolerance<double>(52), it);
  return 0.5 * (br.first + br.second);
}

double radial_energy_exact(Dimension n, double p, double r, double delta, double beta) {
  if (!(r > 0.0)) throw DomainError("inner radius must be positive");
  const double om = sphere_measure(n.value() - 1);
  const int k = n.value() - 1;
  return layer_energy_flux([&](double s) { return om * std::pow(std::sinh(r + s), k); }, p, delta, beta);
}

double radial_energy_closed_form_2d(double r, double delta, double beta) {
  const double R = r + delta;
  const double c = beta / (1.0 / std::sinh(R) + beta * std::log(std::tanh(R / 2) / std::tanh(r / 2)));
  return 2.0 * pi * c;
}

namespace {

struct Level {
  double energy = 0.0;
  double flux_spread = 0.0;
  int iterations = 0;
  std::vector<double> t, u;
};

Level minimize_level(int n, double p, double r, double delta, double beta, int N, const RadialEnergyOptions& opts) {
  const double om = sphere_measure(n - 1);
  const double h = delta / N;
  std::vector<double> c(N);  // int_e w / h^p
  for (int e = 0; e < N; ++e) {
    const double a = r + e * h;
    const double A = boost::math::quadrature::gauss<double, 10>::integrate(
        [&](double t) { return om * std::pow(std::sinh(t), n - 1); }, a, a + h);
    c[e] = A / std::pow(h, p);
  }
  const double B = beta * om * std::pow(std::sinh(r + delta), n - 1);

  Level L;
  L.t.resize(N + 1);
  L.u.resize(N + 1);
  for (int i = 0; i <= N; ++i) {
    L.t[i] = r + i * h;
    L.u[i] = 1.0 - 0.5 * i / N;
  }
  auto energy = [&](const std::vector<double>& u) {
    double E = B * std::pow(std::abs(u[N]), p);
    for (int e = 0; e < N; ++e) E += c[e] * std::pow(std::abs(u[e + 1] - u[e]), p);
    return E;
  };

  std::vector<double> g(N + 1), diag(N + 1), off(N + 1), x(N + 1), trial(N + 1);
  double E = energy(L.u);
  for (; L.iterations < opts.max_iter; ++L.iterations) {
    std::fill(g.begin(), g.end(), 0.0);
    std::fill(diag.begin(), diag.end(), 0.0);
    std::fill(off.begin(), off.end(), 0.0);
    for (int e = 0; e < N; ++e) {
      const double d = L.u[e + 1] - L.u[e], ad = std::abs(d);
      const double fl = p * c[e] * std::pow(ad, p - 2.0) * d;
      const double k = p * (p - 1.0) * c[e] * std::pow(ad, p - 2.0);
      g[e] -= fl;
      g[e + 1] += fl;
      diag[e] += k;
      diag[e + 1] += k;
      off[e + 1] = -k;  // coupling between e and e + 1
    }
    const double uN = std::abs(L.u[N]);
    g[N] += p * B * std::pow(uN, p - 2.0) * L.u[N];
    diag[N] += p * (p - 1.0) * B * std::pow(uN, p - 2.0);

    // Thomas algorithm on the free nodes 1..N.
    std::vector<double> cp(N + 1), dp(N + 1);
    for (int i = 1; i <= N; ++i) {
      const double sub = i > 1 ? off[i] : 0.0;
      const double den = diag[i] - (i > 1 ? sub * cp[i - 1] : 0.0);
      cp[i] = i < N ? off[i + 1] / den : 0.0;
      dp[i] = (-g[i] - (i > 1 ? sub * dp[i - 1] : 0.0)) / den;
    }
    x[0] = 0.0;
    x[N] = dp[N];
    for (int i = N - 1; i >= 1; --i) x[i] = dp[i] - cp[i] * x[i + 1];

    double decrement = 0.0;
    for (int i = 1; i <= N; ++i) decrement -= g[i] * x[i];
    if (decrement <= opts.grad_tol * opts.grad_tol * E) break;

    double step = 1.0, Et = 0.0;
    for (int ls = 0; ls < 60; ++ls, step *= 0.5) {
      for (int i = 0; i <= N; ++i) trial[i] = L.u[i] + step * x[i];
      Et = energy(trial);
      if (Et <= E - 1e-4 * step * decrement) break;
    }
    if (!(Et < E)) break;  // no further decrease at machine precision
    L.u.swap(trial);
    E = Et;
  }
  if (L.iterations >= opts.max_iter) throw IterationLimitError("radial energy Newton did not converge", E);
  L.energy = E;

  double qmin = INFINITY, qmax = -INFINITY, qsum = 0.0;
  for (int e = 0; e < N; ++e) {
    const double d = L.u[e + 1] - L.u[e];
    const double q = c[e] * std::pow(std::abs(d), p - 1.0);
    qmin = std::min(qmin, q);
    qmax = std::max(qmax, q);
    qsum += q;
  }
  L.flux_spread = (qmax - qmin) / (qsum / N);
  return L;
}

}  // namespace

RadialEnergyResult radial_energy(Dimension n, double p, double r, double delta, double beta, const RadialEnergyOptions& opts) {
  if (!(p > 1.0) || !(r > 0.0) || !(delta > 0.0) || !(beta > 0.0)) throw DomainError("radial energy parameters must be positive, p > 1");
  if (opts.elements < 8 || opts.elements % 2) throw PreconditionError("element count must be even and at least 8");
  const Level coarse = minimize_level(n.value(), p, r, delta, beta, opts.elements / 2, opts);
  Level fine = minimize_level(n.value(), p, r, delta, beta, opts.elements, opts);
  RadialEnergyResult res;
  res.energy_coarse = coarse.energy;
  res.energy_fine = fine.energy;
  res.energy = (4.0 * fine.energy - coarse.energy) / 3.0;
  res.flux_spread = fine.flux_spread;
  res.iterations = fine.iterations;
  res.t = std::move(fine.t);
  res.u = std::move(fine.u);
  return res;
}

ChartCurve outer_parallel_curve(const Body2D& hole, double delta) {
  return [hole, delta](double theta) { return disk_exp(hole.chart_point(theta), hole.chart_normal(theta), delta); };
}

FemEnergyResult fem_energy_p2(const Body2D& hole, double delta, double beta, double h_mesh) {
  if (!(delta > 0.0)) throw DomainError("delta must be positive");
  if (!(beta >= 0.0)) throw DomainError("beta must be nonnegative");
  if (!convexity_report(Body(hole)).is_convex) throw PreconditionError("hole is not convex");
  FemEnergyResult res;
  res.mesh = build_mesh([&hole](double th) { return hole.chart_point(th); }, outer_parallel_curve(hole, delta), h_mesh);
  const Mesh& m = res.mesh;
  const int nv = static_cast<int>(m.num_vertices());

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(m.triangles.size() * 9 + m.boundary_edges.size() * 4);
  for (const auto& t : m.triangles) {
    const Complex p0 = m.vertices[t[0]], p1 = m.vertices[t[1]], p2 = m.vertices[t[2]];
    const double area = 0.5 * std::imag(std::conj(p1 - p0) * (p2 - p0));
    const Complex gr[3] = {p2 - p1, p0 - p2, p1 - p0};
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) trip.emplace_back(t[a], t[b], std::real(gr[a] * std::conj(gr[b])) / (4.0 * area));
  }
  if (beta > 0.0) {
    constexpr double xi[3] = {0.5 - 0.3872983346207417, 0.5, 0.5 + 0.3872983346207417};
    constexpr double wq[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
    for (std::size_t k = 0; k < m.boundary_edges.size(); ++k) {
      if (m.edge_tags[k] != BoundaryTag::Neumann) continue;
      const int a = m.boundary_edges[k][0], b = m.boundary_edges[k][1];
      const Complex za = m.vertices[a], zb = m.vertices[b];
      const double len = std::abs(zb - za);
      double maa = 0.0, mab = 0.0, mbb = 0.0;
      for (int q = 0; q < 3; ++q) {
        const double lam = conformal_factor(std::norm(za + xi[q] * (zb - za))) * wq[q] * len * beta;
        maa += lam * (1 - xi[q]) * (1 - xi[q]);
        mab += lam * (1 - xi[q]) * xi[q];
        mbb += lam * xi[q] * xi[q];
      }
      trip.emplace_back(a, a, maa);
      trip.emplace_back(a, b, mab);
      trip.emplace_back(b, a, mab);
      trip.emplace_back(b, b, mbb);
    }
  }
  Eigen::SparseMatrix<double> A(nv, nv);
  A.setFromTriplets(trip.begin(), trip.end());

  std::vector<int> dof(nv, -1);
  int nf = 0;
  for (int v = 0; v < nv; ++v)
    if (!m.dirichlet[v]) dof[v] = nf++;
  Eigen::VectorXd full = Eigen::VectorXd::Ones(nv);
  if (beta > 0.0) {
    std::vector<Eigen::Triplet<double>> ft;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nf);
    for (int k = 0; k < A.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it) {
        const int i = dof[it.row()], j = dof[it.col()];
        if (i < 0) continue;
        if (j >= 0)
          ft.emplace_back(i, j, it.value());
        else
          rhs[i] -= it.value();
      }
    Eigen::SparseMatrix<double> Af(nf, nf);
    Af.setFromTriplets(ft.begin(), ft.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(Af);
    if (solver.info() != Eigen::Success) throw NumericError("Robin system factorization failed");
    const Eigen::VectorXd uf = solver.solve(rhs);
    if (solver.info() != Eigen::Success) throw NumericError("Robin system solve failed");
    for (int v = 0; v < nv; ++v)
      if (dof[v] >= 0) full[v] = uf[dof[v]];
  }
  res.energy = full.dot(A * full);
  res.u.assign(full.data(), full.data() + nv);
  return res;
}

InsulationReport insulation_verdict(const InsulationSpec& spec, const InsulationOptions& opts) {
  spec.validate();
  InsulationReport rep;
  rep.n = spec.n.value();
  rep.p = spec.p;
  rep.delta = spec.delta;
  rep.beta = spec.beta;

  const Body* body = std::get_if<Body>(&spec.body);
  if (!body || body_is_ball(*body)) {
    rep.r_star = body ? equivalent_ball(*body) : std::get<double>(spec.body);
    rep.E_ball_radial = radial_energy_exact(spec.n, spec.p, rep.r_star, spec.delta, spec.beta);
    rep.E_ball = rep.E_body = rep.E_ball_radial;
    rep.method = "radial";
    rep.body_is_ball = true;
  } else {
    rep.r_star = equivalent_ball(*body);  // checks convexity / h-convexity
    rep.E_ball_radial = radial_energy_exact(spec.n, spec.p, rep.r_star, spec.delta, spec.beta);
    const Body2D* b2 = std::get_if<Body2D>(body);
    if (b2 && spec.p == 2.0) {
      const auto fb = fem_energy_p2(*b2, spec.delta, spec.beta, opts.h_mesh);
      const auto fs = fem_energy_p2(Body2D::ball(rep.r_star), spec.delta, spec.beta, opts.h_mesh);
      rep.E_body = fb.energy;
      rep.E_ball = fs.energy;
      rep.fem_dofs = static_cast<int>(fb.mesh.num_vertices());
      rep.method = "fem2d";
    } else {
      const auto profile = curvature_profile(*body);
      rep.E_body = layer_energy_flux([&](double s) { return parallel_perimeter_direct(profile, s); }, spec.p, spec.delta,
                                     spec.beta);
      rep.E_ball = rep.E_ball_radial;
      rep.method = "parallel_bound";
    }
  }
  rep.margin = rep.E_ball - rep.E_body;
  rep.equality_detected = std::abs(rep.margin) <= opts.tol_eq * rep.E_ball;
  rep.verdict = rep.margin >= -opts.tol_margin;
  return rep;
}

}  // namespace hyperrfk
