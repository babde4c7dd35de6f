#include "hyperrfk/spectral_fem2d.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <ostream>

#include "hyperrfk/errors.hpp"
#include "hyperrfk/format.hpp"
#include "hyperrfk/hyperbolic_core.hpp"

namespace hyperrfk {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

// Interior three-point rule; barycentric coordinate of vertex i at point k.
constexpr double bary(int i, int k) { return i == k ? 2.0 / 3.0 : 1.0 / 6.0; }

struct Element {
  std::array<int, 3> v;
  double area;
  std::array<Complex, 3> grad;  // gradients of the barycentric coordinates
  std::array<double, 3> lambda;  // conformal factor at the quadrature points
};

struct Discretization {
  std::vector<Element> elements;
  std::vector<int> dof;  // -1 on Dirichlet vertices
  int ndof = 0;
};

Discretization discretize(const Mesh& mesh) {
  Discretization d;
  d.dof.assign(mesh.num_vertices(), -1);
  for (std::size_t v = 0; v < mesh.num_vertices(); ++v)
    if (!mesh.dirichlet[v]) d.dof[v] = d.ndof++;
  if (d.ndof == 0) throw PreconditionError("mesh has no free vertices");
  d.elements.reserve(mesh.triangles.size());
  for (const auto& t : mesh.triangles) {
    Element e;
    e.v = t;
    const Complex p0 = mesh.vertices[t[0]], p1 = mesh.vertices[t[1]], p2 = mesh.vertices[t[2]];
    const Complex e1 = p1 - p0, e2 = p2 - p0;
    e.area = 0.5 * (e1.real() * e2.imag() - e1.imag() * e2.real());
    if (!(e.area > 0.0)) throw DomainError("degenerate or clockwise triangle");
    const Complex i2a(0.0, 1.0 / (2.0 * e.area));
    e.grad = {i2a * (p2 - p1), i2a * (p0 - p2), i2a * (p1 - p0)};
    for (int k = 0; k < 3; ++k) {
      const Complex x = bary(0, k) * p0 + bary(1, k) * p1 + bary(2, k) * p2;
      e.lambda[k] = conformal_factor(std::norm(x));
    }
    d.elements.push_back(e);
  }
  return d;
}

double dot(Complex a, Complex b) { return a.real() * b.real() + a.imag() * b.imag(); }

// Free-dof matrix sum_e weight(e) * local stiffness.
template <class Weight>
SpMat stiffness(const Discretization& d, Weight weight) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(d.elements.size() * 9);
  for (const auto& e : d.elements) {
    const double w = weight(e) * e.area;
    for (int i = 0; i < 3; ++i) {
      const int a = d.dof[e.v[i]];
      if (a < 0) continue;
      for (int j = 0; j < 3; ++j) {
        const int b = d.dof[e.v[j]];
        if (b >= 0) trip.emplace_back(a, b, w * dot(e.grad[i], e.grad[j]));
      }
    }
  }
  SpMat k(d.ndof, d.ndof);
  k.setFromTriplets(trip.begin(), trip.end());
  return k;
}

SpMat mass(const Discretization& d) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(d.elements.size() * 9);
  for (const auto& e : d.elements) {
    for (int i = 0; i < 3; ++i) {
      const int a = d.dof[e.v[i]];
      if (a < 0) continue;
      for (int j = 0; j < 3; ++j) {
        const int b = d.dof[e.v[j]];
        if (b < 0) continue;
        double s = 0.0;
        for (int k = 0; k < 3; ++k) s += e.lambda[k] * e.lambda[k] * bary(i, k) * bary(j, k);
        trip.emplace_back(a, b, s * e.area / 3.0);
      }
    }
  }
  SpMat m(d.ndof, d.ndof);
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

std::vector<double> to_vertices(const Discretization& d, const Vec& x) {
  std::vector<double> u(d.dof.size(), 0.0);
  for (std::size_t v = 0; v < d.dof.size(); ++v)
    if (d.dof[v] >= 0) u[v] = x[d.dof[v]];
  return u;
}

// Scales u to max |u| = 1 with a positive majority sign; reports constant sign.
bool normalize_sign(std::vector<double>& u) {
  double big = 0.0, sum = 0.0;
  for (double x : u) {
    big = std::max(big, std::abs(x));
    sum += x;
  }
  const double s = (sum < 0.0 ? -1.0 : 1.0) / big;
  double lo = 0.0;
  for (double& x : u) {
    x *= s;
    lo = std::min(lo, x);
  }
  return lo >= -1e-10;
}

template <class Solver>
void factor(Solver& solver, const SpMat& a) {
  solver.compute(a);
  if (solver.info() != Eigen::Success) throw NumericError("sparse LDL^T factorization failed");
}

}  // namespace

FemEigResult eigen_p2(const Mesh& mesh, const FemOptions& opts) {
  const Discretization d = discretize(mesh);
  const SpMat k = stiffness(d, [](const Element&) { return 1.0; });
  const SpMat m = mass(d);
  Eigen::SimplicialLDLT<SpMat> solver;
  factor(solver, k);

  Vec x = Vec::Ones(d.ndof);
  x /= std::sqrt(x.dot(m * x));
  double tau = x.dot(k * x), residual = 1.0;
  bool shifted = false, converged = false;
  int it = 0;
  while (it < opts.max_iter) {
    ++it;
    Vec y = solver.solve(m * x);
    if (solver.info() != Eigen::Success) throw NumericError("sparse solve failed");
    x = y / std::sqrt(y.dot(m * y));
    const double prev = tau;
    const Vec mx = m * x;
    tau = x.dot(k * x);
    residual = (k * x - tau * mx).norm() / mx.norm();
    if (residual <= opts.residual_tol) {
      converged = true;
      break;
    }
    if (!shifted && it >= 3 && std::abs(tau - prev) <= 1e-4 * tau) {
      // tau is an upper bound already close to tau_1; 0.9 tau stays below it.
      factor(solver, SpMat(k - 0.9 * tau * m));
      shifted = true;
    }
  }
  if (!converged) throw IterationLimitError("inverse iteration did not reach the residual tolerance", tau);

  FemEigResult res;
  res.tau1 = tau;
  res.u = to_vertices(d, x);
  res.constant_sign = normalize_sign(res.u);
  res.residual = residual;
  res.iterations = it;
  res.converged = true;
  res.dofs = d.ndof;
  res.h_mesh = mesh.h_mesh;
  return res;
}

namespace {

struct PProblem {
  const Discretization& d;
  double p;
  std::vector<double> omega;  // integral of lambda^{2-p} over each element

  PProblem(const Discretization& disc, double p_) : d(disc), p(p_) {
    omega.reserve(d.elements.size());
    for (const auto& e : d.elements) {
      double s = 0.0;
      for (double l : e.lambda) s += std::pow(l, 2.0 - p);
      omega.push_back(s * e.area / 3.0);
    }
  }

  double value(const Vec& x, int v) const { return d.dof[v] >= 0 ? x[d.dof[v]] : 0.0; }

  Complex gradient(const Element& e, const Vec& x) const {
    return value(x, e.v[0]) * e.grad[0] + value(x, e.v[1]) * e.grad[1] + value(x, e.v[2]) * e.grad[2];
  }

  double numerator(const Vec& x) const {
    double s = 0.0;
    for (std::size_t i = 0; i < d.elements.size(); ++i) s += omega[i] * std::pow(std::abs(gradient(d.elements[i], x)), p);
    return s;
  }

  double denominator(const Vec& x) const {
    double s = 0.0;
    for (const auto& e : d.elements) {
      double t = 0.0;
      for (int k = 0; k < 3; ++k) {
        double uq = 0.0;
        for (int i = 0; i < 3; ++i) uq += bary(i, k) * value(x, e.v[i]);
        t += e.lambda[k] * e.lambda[k] * std::pow(std::abs(uq), p);
      }
      s += t * e.area / 3.0;
    }
    return s;
  }

  void gradients(const Vec& x, Vec& ga, Vec& gb) const {
    ga.setZero(d.ndof);
    gb.setZero(d.ndof);
    for (std::size_t n = 0; n < d.elements.size(); ++n) {
      const Element& e = d.elements[n];
      const Complex g = gradient(e, x);
      const double gn = std::abs(g);
      const double ca = gn > 0.0 ? omega[n] * p * std::pow(gn, p - 2.0) : 0.0;
      std::array<double, 3> cq;
      for (int k = 0; k < 3; ++k) {
        double uq = 0.0;
        for (int i = 0; i < 3; ++i) uq += bary(i, k) * value(x, e.v[i]);
        cq[k] = e.area / 3.0 * e.lambda[k] * e.lambda[k] * p * std::copysign(std::pow(std::abs(uq), p - 1.0), uq);
      }
      for (int i = 0; i < 3; ++i) {
        const int a = d.dof[e.v[i]];
        if (a < 0) continue;
        ga[a] += ca * dot(g, e.grad[i]);
        for (int k = 0; k < 3; ++k) gb[a] += cq[k] * bary(i, k);
      }
    }
  }
};

}  // namespace

FemEigResult eigen_p_general_from(const Mesh& mesh, double p, std::span<const double> start, const PGeneralOptions& opts) {
  if (!(p > 1.0) || !std::isfinite(p)) throw DomainError("p must lie in (1, inf)");
  if (start.size() != mesh.num_vertices()) throw PreconditionError("start vector does not match the mesh");
  const Discretization d = discretize(mesh);
  const PProblem prob(d, p);

  Vec x(d.ndof);
  for (std::size_t v = 0; v < d.dof.size(); ++v)
    if (d.dof[v] >= 0) x[d.dof[v]] = start[v];
  auto normalize = [&](Vec& y) {
    const double b = prob.denominator(y);
    if (!(b > 0.0)) throw NumericError("iterate vanished");
    y /= std::pow(b, 1.0 / p);
  };
  normalize(x);
  double q = prob.numerator(x);

  Eigen::SimplicialLDLT<SpMat> solver;
  bool analysed = false;
  std::vector<double> history{q};
  Vec ga, gb;
  bool converged = false;
  double last_decrease = 0.0;
  int it = 0;
  while (it < opts.max_iter) {
    ++it;
    prob.gradients(x, ga, gb);
    const Vec gq = ga - q * gb;

    double gmax = 0.0;
    for (const auto& e : d.elements) gmax = std::max(gmax, std::abs(prob.gradient(e, x)));
    const double eps2 = std::pow(1e-6 * gmax, 2);
    std::size_t n = 0;
    const SpMat pk = stiffness(d, [&](const Element& e) {
      const double g2 = std::norm(prob.gradient(e, x)) + eps2;
      return prob.omega[n++] / e.area * std::pow(g2, 0.5 * (p - 2.0));
    });
    if (!analysed) {
      solver.analyzePattern(pk);
      analysed = true;
    }
    solver.factorize(pk);
    if (solver.info() != Eigen::Success) throw NumericError("preconditioner factorization failed");
    const Vec dir = -solver.solve(gq) / p;
    const double slope = gq.dot(dir);
    if (!(slope < 0.0)) {
      converged = true;
      break;
    }

    double alpha = 1.0, qn = q;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      Vec trial = x + alpha * dir;
      qn = prob.numerator(trial) / prob.denominator(trial);
      if (qn <= q + opts.armijo * alpha * slope) {
        x = std::move(trial);
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      converged = true;  // no representable decrease left
      break;
    }
    normalize(x);
    q = qn;
    history.push_back(q);
    const auto w = static_cast<std::size_t>(opts.stall_window);
    if (history.size() > w) {
      last_decrease = history[history.size() - 1 - w] - q;
      if (last_decrease < opts.stall_tol * q) {
        converged = true;
        break;
      }
    }
  }
  if (!converged) throw IterationLimitError("p-quotient descent did not stall", q);

  FemEigResult res;
  res.tau1 = q;
  res.u = to_vertices(d, x);
  res.constant_sign = normalize_sign(res.u);
  res.residual = last_decrease / q;
  res.iterations = it;
  res.converged = true;
  res.dofs = d.ndof;
  res.h_mesh = mesh.h_mesh;
  return res;
}

FemEigResult eigen_p_general(const Mesh& mesh, double p, const PGeneralOptions& opts) {
  const FemEigResult base = eigen_p2(mesh);
  FemEigResult best = eigen_p_general_from(mesh, p, base.u, opts);
  std::vector<double> ones(mesh.num_vertices(), 1.0);
  for (std::size_t v = 0; v < ones.size(); ++v)
    if (mesh.dirichlet[v]) ones[v] = 0.0;
  FemEigResult other = eigen_p_general_from(mesh, p, ones, opts);
  const std::vector<double> starts{best.tau1, other.tau1};
  if (other.tau1 < best.tau1) best = std::move(other);
  best.start_values = starts;
  return best;
}

double mesh_hyperbolic_area(const Mesh& mesh) {
  double s = 0.0;
  for (const auto& t : mesh.triangles) {
    const Complex p0 = mesh.vertices[t[0]], p1 = mesh.vertices[t[1]], p2 = mesh.vertices[t[2]];
    const Complex e1 = p1 - p0, e2 = p2 - p0;
    const double area = 0.5 * (e1.real() * e2.imag() - e1.imag() * e2.real());
    double w = 0.0;
    for (int k = 0; k < 3; ++k) {
      const double l = conformal_factor(std::norm(bary(0, k) * p0 + bary(1, k) * p1 + bary(2, k) * p2));
      w += l * l;
    }
    s += w * area / 3.0;
  }
  return s;
}

namespace {

Vec free_values(const Discretization& d, std::span<const double> u, const Mesh& mesh) {
  if (u.size() != mesh.num_vertices()) throw PreconditionError("field does not match the mesh");
  Vec x(d.ndof);
  for (std::size_t v = 0; v < d.dof.size(); ++v)
    if (d.dof[v] >= 0) x[d.dof[v]] = u[v];
  return x;
}

// Treats every vertex as free so that non-zero boundary values count.
Mesh all_free(const Mesh& mesh) {
  Mesh m = mesh;
  std::fill(m.dirichlet.begin(), m.dirichlet.end(), 0);
  return m;
}

}  // namespace

double weighted_lp_integral(const Mesh& mesh, std::span<const double> u, double p) {
  const Mesh m = all_free(mesh);
  const Discretization d = discretize(m);
  return PProblem(d, p).denominator(free_values(d, u, m));
}

double p_dirichlet_energy(const Mesh& mesh, std::span<const double> u, double p) {
  const Mesh m = all_free(mesh);
  const Discretization d = discretize(m);
  return PProblem(d, p).numerator(free_values(d, u, m));
}

void write_vertex_csv(std::ostream& os, const Mesh& mesh, std::span<const double> u) {
  if (u.size() != mesh.num_vertices()) throw PreconditionError("field does not match the mesh");
  os << "x,y,u\n";
  for (std::size_t v = 0; v < u.size(); ++v)
    os << fmt_double(mesh.vertices[v].real()) << ',' << fmt_double(mesh.vertices[v].imag()) << ',' << fmt_double(u[v]) << '\n';
}

}  // namespace hyperrfk
