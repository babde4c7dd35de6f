#include "hyperrfk/hersch_rfk.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "hyperrfk/errors.hpp"
#include "hyperrfk/format.hpp"
#include "hyperrfk/spectral_fem2d.hpp"

namespace hyperrfk {

using std::numbers::pi;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double hyp_from_q(double q, Complex z) { return 2.0 * std::asinh(std::sqrt(q / (1.0 - std::norm(z)))); }

template <class F>
double solve_increasing(F f, double lo, double hi) {
  const double flo = f(lo), fhi = f(hi);
  if (flo >= 0.0) return lo;
  if (fhi <= 0.0) return hi;
  boost::uintmax_t iters = 100;
  const auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, boost::math::tools::eps_tolerance<double>(50), iters);
  return 0.5 * (a + b);
}

// Euclidean polar radius of Gamma_N on a fine angle table; used for inside tests.
class RadiusTable {
 public:
  RadiusTable(const StarCurve& curve, int n = 65536) : r_(n + 1) {
    for (int k = 0; k < n; ++k) r_[k] = curve.radius(2.0 * pi * k / n);
    r_[n] = r_[0];
  }
  double radius(double theta) const {
    const int n = static_cast<int>(r_.size()) - 1;
    double t = theta / (2.0 * pi);
    t -= std::floor(t);
    const double x = t * n;
    const int k = std::min(static_cast<int>(x), n - 1);
    return r_[k] + (x - k) * (r_[k + 1] - r_[k]);
  }
  bool contains(Complex z) const { return std::abs(z) < radius(std::arg(z)); }

 private:
  std::vector<double> r_;
};

}  // namespace

HoleDistance::HoleDistance(const Body2D& hole, int samples) : hole_(hole) {
  theta_.resize(samples);
  pts_.resize(samples);
  inv_.resize(samples);
  for (int k = 0; k < samples; ++k) {
    theta_[k] = 2.0 * pi * k / samples;
    pts_[k] = hole_.chart_point(theta_[k]);
    inv_[k] = 1.0 / (1.0 - std::norm(pts_[k]));
  }
}

bool HoleDistance::inside(Complex z) const { return std::abs(z) < chart_radius(hole_.radius(std::arg(z))); }

double HoleDistance::operator()(Complex z) const {
  // Minimize |z - c|^2 / (1 - |c|^2) over boundary points c; for fixed z this
  // is monotone in the hyperbolic distance.
  const int n = static_cast<int>(pts_.size());
  int best = 0;
  double qbest = std::numeric_limits<double>::infinity();
  for (int k = 0; k < n; ++k) {
    const double q = std::norm(z - pts_[k]) * inv_[k];
    if (q < qbest) {
      qbest = q;
      best = k;
    }
  }
  const double step = 2.0 * pi / n;
  auto q = [&](double t) {
    const Complex c = hole_.chart_point(t);
    return std::norm(z - c) / (1.0 - std::norm(c));
  };
  const double t0 = theta_[best];
  const auto [t, qmin] = boost::math::tools::brent_find_minima(q, t0 - step, t0 + step, 26);
  (void)t;
  const double d = hyp_from_q(std::min(qmin, qbest), z);
  return inside(z) ? -d : d;
}

DistanceField distance_field(const AnnularDomain2D& dom, int grid_res) {
  if (grid_res < 16) throw PreconditionError("grid resolution must be at least 16");
  if (!convexity_report(Body(dom.inner)).is_convex) throw PreconditionError("hole is not convex");
  const StarCurve outer(dom.outer_curve());
  const RadiusTable table(outer);
  const HoleDistance dist(dom.inner);

  double xmin = 1.0, xmax = -1.0, ymin = 1.0, ymax = -1.0, rmax = 0.0;
  constexpr int kBoundary = 4096;
  std::vector<Complex> gamma_n(kBoundary);
  for (int k = 0; k < kBoundary; ++k) {
    const Complex z = outer.point(2.0 * pi * k / kBoundary);
    gamma_n[k] = z;
    xmin = std::min(xmin, z.real());
    xmax = std::max(xmax, z.real());
    ymin = std::min(ymin, z.imag());
    ymax = std::max(ymax, z.imag());
    rmax = std::max(rmax, std::abs(z));
  }
  const double side = std::max(xmax - xmin, ymax - ymin);
  DistanceField f;
  f.res = grid_res;
  f.cell = side / (grid_res - 5);
  f.x0 = 0.5 * (xmin + xmax) - 0.5 * (grid_res - 1) * f.cell;
  f.y0 = 0.5 * (ymin + ymax) - 0.5 * (grid_res - 1) * f.cell;
  f.lambda_max = conformal_factor(rmax * rmax);
  f.d.assign(static_cast<std::size_t>(grid_res) * grid_res, kNaN);
  f.in_outer.assign(f.d.size(), 0);
  const double band = 3.0 * f.cell;
  for (int j = 0; j < grid_res; ++j) {
    for (int i = 0; i < grid_res; ++i) {
      const Complex z = f.node(i, j);
      const double rz = std::abs(z), b = table.radius(std::arg(z));
      if (rz >= b + band || rz >= 1.0) continue;
      const std::size_t idx = static_cast<std::size_t>(j) * grid_res + i;
      f.in_outer[idx] = rz < b;
      f.d[idx] = dist(z);
    }
  }

  // delta0 is attained on Gamma_N (the distance to a convex set has no interior maximum).
  int best = 0;
  double dbest = -1.0;
  for (int k = 0; k < kBoundary; ++k) {
    const double d = dist(gamma_n[k]);
    if (d > dbest) {
      dbest = d;
      best = k;
    }
  }
  const double step = 2.0 * pi / kBoundary;
  auto neg = [&](double t) { return -dist(outer.point(t)); };
  const double t0 = 2.0 * pi * best / kBoundary;
  const auto res = boost::math::tools::brent_find_minima(neg, t0 - step, t0 + step, 40);
  f.delta0 = std::max(dbest, -res.second);
  return f;
}

namespace {

struct Segment {
  Complex a, b;
};

// Contour pieces of the level `level` in cell (i, j); returns the count.
int cell_segments(const DistanceField& f, int i, int j, double level, Segment out[2]) {
  const double v[4] = {f.at(i, j), f.at(i + 1, j), f.at(i + 1, j + 1), f.at(i, j + 1)};
  const Complex p[4] = {f.node(i, j), f.node(i + 1, j), f.node(i + 1, j + 1), f.node(i, j + 1)};
  bool up[4];
  int count = 0;
  for (int k = 0; k < 4; ++k) {
    up[k] = v[k] >= level;
    count += up[k];
  }
  if (count == 0 || count == 4) return 0;
  Complex x[4];
  bool has[4];
  for (int e = 0; e < 4; ++e) {
    const int a = e, b = (e + 1) % 4;
    has[e] = up[a] != up[b];
    if (has[e]) x[e] = p[a] + (level - v[a]) / (v[b] - v[a]) * (p[b] - p[a]);
  }
  // Edges: 0 bottom, 1 right, 2 top, 3 left.
  if (has[0] && has[1] && has[2] && has[3]) {
    const bool centre = 0.25 * (v[0] + v[1] + v[2] + v[3]) >= level;
    if (centre == up[0]) {
      out[0] = {x[0], x[1]};
      out[1] = {x[2], x[3]};
    } else {
      out[0] = {x[0], x[3]};
      out[1] = {x[1], x[2]};
    }
    return 2;
  }
  int e0 = -1, e1 = -1;
  for (int e = 0; e < 4; ++e)
    if (has[e]) (e0 < 0 ? e0 : e1) = e;
  out[0] = {x[e0], x[e1]};
  return 1;
}

double hyperbolic_length(Complex a, Complex b) {
  const double la = conformal_factor(std::norm(a)), lb = conformal_factor(std::norm(b));
  const double lm = conformal_factor(std::norm(0.5 * (a + b)));
  return std::abs(b - a) * (la + 4.0 * lm + lb) / 6.0;
}

double clipped_length(const Segment& s, const RadiusTable& outer) {
  const bool ia = outer.contains(s.a), ib = outer.contains(s.b);
  if (ia && ib) return hyperbolic_length(s.a, s.b);
  if (!ia && !ib) return 0.0;
  Complex in = ia ? s.a : s.b, out = ia ? s.b : s.a;
  for (int k = 0; k < 40; ++k) {
    const Complex mid = 0.5 * (in + out);
    (outer.contains(mid) ? in : out) = mid;
  }
  return hyperbolic_length(ia ? s.a : s.b, in);
}

}  // namespace

std::vector<double> parallel_lengths(const AnnularDomain2D& dom, const DistanceField& f, std::span<const double> deltas) {
  for (std::size_t k = 0; k < deltas.size(); ++k) {
    if (!(deltas[k] >= 0.0 && deltas[k] <= f.delta0)) throw DomainError("delta outside [0, delta0]");
    if (k > 0 && !(deltas[k] > deltas[k - 1])) throw PreconditionError("deltas must be strictly increasing");
  }
  const RadiusTable outer(StarCurve(dom.outer_curve()));
  std::vector<double> length(deltas.size(), 0.0);
  Segment seg[2];
  for (int j = 0; j + 1 < f.res; ++j) {
    for (int i = 0; i + 1 < f.res; ++i) {
      const double v[4] = {f.at(i, j), f.at(i + 1, j), f.at(i + 1, j + 1), f.at(i, j + 1)};
      if (std::isnan(v[0]) || std::isnan(v[1]) || std::isnan(v[2]) || std::isnan(v[3])) continue;
      const std::size_t base = static_cast<std::size_t>(j) * f.res + i;
      if (!f.in_outer[base] && !f.in_outer[base + 1] && !f.in_outer[base + f.res] && !f.in_outer[base + f.res + 1]) continue;
      const double lo = std::min({v[0], v[1], v[2], v[3]}), hi = std::max({v[0], v[1], v[2], v[3]});
      auto k = static_cast<std::size_t>(std::lower_bound(deltas.begin(), deltas.end(), lo) - deltas.begin());
      for (; k < deltas.size() && deltas[k] <= hi; ++k) {
        const int n = cell_segments(f, i, j, deltas[k], seg);
        for (int s = 0; s < n; ++s) length[k] += clipped_length(seg[s], outer);
      }
    }
  }
  return length;
}

double parallel_length(const AnnularDomain2D& dom, const DistanceField& field, double delta) {
  const double d[1] = {delta};
  return parallel_lengths(dom, field, d)[0];
}

double ParallelTable::length(double delta) const {
  if (!(delta >= 0.0 && delta <= delta0 * (1.0 + 1e-12))) throw DomainError("delta outside [0, delta0]");
  const std::size_t n = deltas.size();
  const double end = deltas.back();
  if (delta <= end) {
    auto it = std::upper_bound(deltas.begin(), deltas.end(), delta);
    const std::size_t k = std::clamp<std::size_t>(static_cast<std::size_t>(it - deltas.begin()), 1, n - 1) - 1;
    const double t = (delta - deltas[k]) / (deltas[k + 1] - deltas[k]);
    return L[k] + t * (L[k + 1] - L[k]);
  }
  // Tail: linear extrapolation while it stays positive, otherwise the
  // square-root closing of a level set shrinking onto Gamma_N.
  const double slope = (L[n - 1] - L[n - 2]) / (deltas[n - 1] - deltas[n - 2]);
  const double at_end = L[n - 1] + slope * (delta0 - end);
  if (at_end > 0.0) return L[n - 1] + slope * (delta - end);
  return L[n - 1] * std::sqrt(std::max(0.0, delta0 - delta) / (delta0 - end));
}

ParallelTable parallel_table(const AnnularDomain2D& dom, const DistanceField& field, double r_match, int samples) {
  if (samples < 8) throw PreconditionError("at least 8 table samples are required");
  ParallelTable t;
  t.delta0 = field.delta0;
  t.r = r_match;
  t.grid_res = field.res;
  t.cell = field.cell;
  const double end = field.delta0 - 3.0 * field.cell * field.lambda_max;
  if (!(end > 0.0)) throw DomainError("distance grid too coarse for this domain");
  t.deltas.resize(samples);
  for (int k = 0; k < samples; ++k) t.deltas[k] = end * k / (samples - 1);
  t.L = parallel_lengths(dom, field, t.deltas);
  t.Ltilde.resize(samples);
  for (int k = 0; k < samples; ++k) t.Ltilde[k] = 2.0 * pi * std::sinh(r_match + t.deltas[k]);
  return t;
}

double InteriorCoords::ltilde(double s) const { return 2.0 * pi * std::sinh(r + s); }

double InteriorCoords::mtilde(double s) const {
  if (s <= 0.0) return 0.0;
  const double e = 1.0 - p / (p - 1.0);
  auto f = [&](double t) { return std::pow(ltilde(t), e); };
  // Smooth integrand, singular only at t = -r: fixed composite Gauss.
  constexpr int kPieces = 4;
  double sum = 0.0;
  for (int k = 0; k < kPieces; ++k)
    sum += boost::math::quadrature::gauss<double, 30>::integrate(f, s * k / kPieces, s * (k + 1) / kPieces);
  return sum;
}

double InteriorCoords::mtilde_inverse(double beta) const {
  if (beta <= 0.0) return 0.0;
  if (beta >= Mtilde_star) return R - r;
  return solve_increasing([&](double s) { return mtilde(s) - beta; }, 0.0, R - r);
}

double InteriorCoords::m(double delta) const {
  const auto& d = table.deltas;
  const double end = d.back();
  if (delta <= end) {
    auto it = std::upper_bound(d.begin(), d.end(), delta);
    const std::size_t k = std::clamp<std::size_t>(static_cast<std::size_t>(it - d.begin()), 1, d.size() - 1) - 1;
    const double t = (delta - d[k]) / (d[k + 1] - d[k]);
    return M[k] + t * (M[k + 1] - M[k]);
  }
  const double e = 1.0 - p / (p - 1.0);
  auto f = [&](double x) { return std::pow(std::max(table.length(x), 1e-300), e); };
  const double top = std::min(delta, table.delta0);
  boost::math::quadrature::tanh_sinh<double> ts;
  return M.back() + ts.integrate(f, end, top);
}

double InteriorCoords::m_inverse(double beta) const {
  if (beta <= 0.0) return 0.0;
  if (beta <= M.back()) {
    auto it = std::upper_bound(M.begin(), M.end(), beta);
    const std::size_t k = std::clamp<std::size_t>(static_cast<std::size_t>(it - M.begin()), 1, M.size() - 1) - 1;
    const double t = (beta - M[k]) / (M[k + 1] - M[k]);
    return table.deltas[k] + t * (table.deltas[k + 1] - table.deltas[k]);
  }
  if (beta >= M_star) return table.delta0;
  return solve_increasing([&](double x) { return m(x) - beta; }, table.deltas.back(), table.delta0);
}

InteriorCoords interior_coords(const ParallelTable& table, double p, double R) {
  if (!(p > 1.0)) throw DomainError("p must lie in (1, inf)");
  if (!(R > table.r)) throw DomainError("outer radius must exceed the matched inner radius");
  InteriorCoords c;
  c.p = p;
  c.r = table.r;
  c.R = R;
  c.table = table;
  c.deltas = table.deltas;
  const double e = 1.0 - p / (p - 1.0);
  c.M.assign(table.deltas.size(), 0.0);
  for (std::size_t k = 1; k < table.deltas.size(); ++k) {
    if (!(table.L[k] > 0.0)) throw DataError("parallel length vanishes inside the table");
    const double h = table.deltas[k] - table.deltas[k - 1];
    c.M[k] = c.M[k - 1] + 0.5 * h * (std::pow(table.L[k - 1], e) + std::pow(table.L[k], e));
    if (!(c.M[k] > c.M[k - 1])) throw DataError("M is not strictly increasing");
  }
  c.M_star = c.m(table.delta0);
  c.Mtilde_star = c.mtilde(R - c.r);
  return c;
}

std::pair<double, double> annulus_match(const AnnularDomain2D& dom) {
  if (!convexity_report(Body(dom.inner)).is_convex) throw PreconditionError("hole is not convex");
  const double area = dom.area();
  const double r = std::asinh(boundary_measures(dom.inner).perimeter / (2.0 * pi));
  const double R = std::acosh(std::cosh(r) + area / (2.0 * pi));
  return {r, R};
}

HerschBound hersch_bound(const InteriorCoords& c, const EigResult& shell) {
  const double p = c.p;
  if (std::abs(shell.spec.r - c.r) > 1e-12 || std::abs(shell.spec.R - c.R) > 1e-12 || std::abs(shell.spec.p - p) > 1e-15 ||
      shell.spec.n != 2)
    throw DataError("shell solution does not match the interior coordinates");
  const auto& prof = shell.profile;
  auto v = [&](double t) { return radial_profile_eval(shell, std::clamp(t, c.r, c.R)); };
  auto dv = [&](double t) { return radial_profile_derivative(shell, std::clamp(t, c.r, c.R)); };
  using GL = boost::math::quadrature::gauss<double, 8>;

  HerschBound h;
  for (std::size_t k = 0; k + 1 < prof.t.size(); ++k) {
    const double a = prof.t[k], b = prof.t[k + 1];
    h.numerator += GL::integrate([&](double t) { return std::pow(std::abs(dv(t)), p) * c.ltilde(t - c.r); }, a, b);
    h.annulus_denominator += GL::integrate([&](double t) { return std::pow(v(t), p) * c.ltilde(t - c.r); }, a, b);
  }

  // Same numerator written in the beta variable: f'(beta) = v'(r + s) Ltilde(s)^{p'-1}.
  const double pc = p / (p - 1.0);
  constexpr int kBeta = 1024;
  std::vector<double> beta(kBeta + 1), s(kBeta + 1);
  for (int k = 0; k <= kBeta; ++k) {
    beta[k] = c.Mtilde_star * k / kBeta;
    s[k] = c.mtilde_inverse(beta[k]);
  }
  double simpson = 0.0;
  for (int k = 0; k <= kBeta; ++k) {
    const double w = (k == 0 || k == kBeta) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    simpson += w * std::pow(std::abs(dv(c.r + s[k])) * std::pow(c.ltilde(s[k]), pc - 1.0), p);
  }
  h.numerator_beta = simpson * c.Mtilde_star / kBeta / 3.0;

  // Lemma: G(beta) = L(M^{-1}(beta)) against Gtilde(beta) = Ltilde(Mtilde^{-1}(beta)).
  for (int k = 0; k <= kBeta; ++k) {
    const double g = c.table.length(std::min(c.m_inverse(beta[k]), c.table.delta0));
    const double gt = c.ltilde(s[k]);
    h.max_g_excess = std::max(h.max_g_excess, (g - gt) / gt);
    if (k == kBeta) h.terminal_gap = (gt - g) / gt;
  }

  // Denominator by the coarea formula in the distance variable.
  h.delta_bar = std::min(c.m_inverse(c.Mtilde_star), c.table.delta0);
  auto transplanted = [&](double delta) {
    const double sd = c.mtilde_inverse(c.m(delta));
    return std::pow(v(c.r + sd), p) * c.table.length(delta);
  };
  const auto& d = c.table.deltas;
  double main = 0.0, prev_x = 0.0, prev_f = transplanted(0.0);
  for (std::size_t k = 1; k < d.size() && d[k - 1] < h.delta_bar; ++k) {
    const double x = std::min(d[k], h.delta_bar);
    const double fx = transplanted(x);
    main += 0.5 * (x - prev_x) * (prev_f + fx);
    prev_x = x;
    prev_f = fx;
  }
  if (prev_x < h.delta_bar) {
    boost::math::quadrature::tanh_sinh<double> ts;
    main += ts.integrate(transplanted, prev_x, h.delta_bar);
  }
  // Cap region: u = v(R) where M(d) exceeds Mtilde_*.
  double tail = 0.0;
  if (h.delta_bar < c.table.delta0) {
    const double end = d.back();
    double x0 = h.delta_bar;
    if (x0 < end) {
      auto it = std::upper_bound(d.begin(), d.end(), x0);
      std::size_t k = static_cast<std::size_t>(it - d.begin());
      double fx0 = c.table.length(x0);
      for (; k < d.size(); ++k) {
        tail += 0.5 * (d[k] - x0) * (fx0 + c.table.L[k]);
        x0 = d[k];
        fx0 = c.table.L[k];
      }
    }
    boost::math::quadrature::tanh_sinh<double> ts;
    tail += ts.integrate([&](double x) { return c.table.length(x); }, x0, c.table.delta0);
  }
  h.denominator = main + std::pow(v(c.R), p) * tail;
  h.bound = h.numerator / h.denominator;
  return h;
}

RFKReport rfk_verdict(const AnnularDomain2D& dom, double p, const RFKOptions& opts) {
  RFKReport rep;
  rep.p = p;
  const auto [r, R] = annulus_match(dom);
  rep.r = r;
  rep.R = R;
  rep.area = dom.area();
  const EigResult shell = shell_eigen(ShellSpec(Dimension(2), p, r, R));
  rep.tau_annulus = shell.tau1;

  const DistanceField field = distance_field(dom, opts.grid_res);
  rep.delta0 = field.delta0;
  rep.grid_res = field.res;
  const ParallelTable table = parallel_table(dom, field, r, opts.delta_samples);
  const InteriorCoords coords = interior_coords(table, p, R);
  rep.detail = hersch_bound(coords, shell);
  rep.hersch_bound = rep.detail.bound;

  const Mesh mesh = build_mesh(dom, opts.h_mesh);
  const FemEigResult fem = p == 2.0 ? eigen_p2(mesh) : eigen_p_general(mesh, p);
  rep.tau_omega = fem.tau1;
  rep.fem_dofs = fem.dofs;
  rep.h_mesh = opts.h_mesh;

  rep.lemma_i_ok = R - r <= field.delta0 + 2.0 * field.cell * field.lambda_max;
  rep.lemma_ii_ok = rep.detail.max_g_excess <= 1e-4;
  rep.chain_ok = rep.tau_omega <= rep.hersch_bound * (1.0 + opts.tol_chain) &&
                 rep.hersch_bound <= rep.tau_annulus * (1.0 + opts.tol_chain);
  rep.equality_detected = std::abs(rep.tau_omega - rep.tau_annulus) <= opts.tol_eq * rep.tau_annulus;
  return rep;
}

void write_parallel_table_csv(std::ostream& os, const ParallelTable& table, const InteriorCoords* coords) {
  os << "delta,L,Ltilde";
  if (coords) os << ",M,Mtilde";
  os << '\n';
  for (std::size_t k = 0; k < table.deltas.size(); ++k) {
    os << fmt_double(table.deltas[k]) << ',' << fmt_double(table.L[k]) << ',' << fmt_double(table.Ltilde[k]);
    if (coords) {
      const double s = std::min(table.deltas[k], coords->R - coords->r);
      os << ',' << fmt_double(coords->M[k]) << ',' << fmt_double(coords->mtilde(s));
    }
    os << '\n';
  }
}

}  // namespace hyperrfk
