#include "hyperrfk/mesh.hpp"

#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <istream>
#include <numbers>
#include <numeric>
#include <ostream>
#include <string>

#include "hyperrfk/errors.hpp"
#include "hyperrfk/format.hpp"

namespace hyperrfk {

using std::numbers::pi;

StarCurve::StarCurve(ChartCurve curve, int table_size) : curve_(std::move(curve)) {
  const int m = std::max(table_size, 64);
  phi_.resize(m + 1);
  theta_.resize(m + 1);
  Complex prev = curve_(0.0);
  if (!(std::abs(prev) > 0.0)) throw DomainError("curve passes through the origin");
  phi_[0] = 0.0;
  theta_[0] = std::arg(prev);
  for (int j = 1; j <= m; ++j) {
    phi_[j] = 2.0 * pi * j / m;
    const Complex z = j == m ? curve_(0.0) : curve_(phi_[j]);
    if (!(std::abs(z) > 0.0) || !(std::abs(z) < 1.0)) throw DomainError("curve leaves the punctured unit disk");
    const double step = std::arg(z / prev);
    if (!(step > 0.0)) throw DomainError("curve is not star-shaped about the origin");
    theta_[j] = theta_[j - 1] + step;
    prev = z;
  }
  if (std::abs(theta_[m] - theta_[0] - 2.0 * pi) > 1e-6) throw DomainError("curve does not wind once around the origin");
}

double StarCurve::radius(double theta) const {
  const double t0 = theta_.front();
  double t = t0 + std::fmod(theta - t0, 2.0 * pi);
  if (t < t0) t += 2.0 * pi;
  auto it = std::upper_bound(theta_.begin(), theta_.end(), t);
  const std::size_t j = std::clamp<std::size_t>(static_cast<std::size_t>(it - theta_.begin()), 1, theta_.size() - 1) - 1;
  const Complex rot = std::polar(1.0, -t);
  auto g = [&](double phi) { return std::arg(curve_(phi) * rot); };
  double lo = phi_[j], hi = phi_[j + 1];
  const double glo = g(lo), ghi = g(hi);
  // Rounding can push a root sitting on a table node just outside the bracket.
  if (glo == 0.0 || (glo > 0.0 && ghi > 0.0)) return std::abs(curve_(lo));
  if (ghi == 0.0 || (glo < 0.0 && ghi < 0.0)) return std::abs(curve_(hi));
  boost::uintmax_t iters = 80;
  const auto [a, b] = boost::math::tools::toms748_solve(g, lo, hi, glo, ghi, boost::math::tools::eps_tolerance<double>(50), iters);
  return std::abs(curve_(0.5 * (a + b)));
}

AnnularDomain2D AnnularDomain2D::concentric(double r, double R) {
  if (!(r < R)) throw DomainError("inner radius must be below outer radius");
  return {Body2D::ball(r), Body2D::ball(R), {}, {}};
}

AnnularDomain2D AnnularDomain2D::offset_ball(double r, double R, double offset) {
  if (!(r + offset < R)) throw DomainError("offset hole does not fit inside the outer ball");
  return {Body2D::ball(r), Body2D::ball(R), Placement::at_distance(offset), {}};
}

ChartCurve AnnularDomain2D::inner_curve() const {
  return [body = inner](double phi) { return body.chart_point(phi); };
}

ChartCurve AnnularDomain2D::outer_curve() const {
  const DiskIsometry g = to_canonical().compose(outer_at.isometry());
  return [body = outer, g](double phi) { return g.apply(body.chart_point(phi)); };
}

bool AnnularDomain2D::is_concentric_annulus(double tol) const {
  const Complex c = to_canonical().compose(outer_at.isometry()).origin_image();
  return inner.is_ball() && outer.is_ball() && std::abs(c) <= tol;
}

double AnnularDomain2D::area() const {
  const double a = boundary_measures(outer).volume - boundary_measures(inner).volume;
  if (!(a > 0.0)) throw DomainError("domain has non-positive area");
  return a;
}

AnnularDomain2D AnnularDomain2D::moved(const DiskIsometry& g) const {
  return {inner, outer, Placement::from_isometry(g.compose(inner_at.isometry())),
          Placement::from_isometry(g.compose(outer_at.isometry()))};
}

namespace {

double signed_area(Complex a, Complex b, Complex c) {
  const Complex u = b - a, v = c - a;
  return 0.5 * (u.real() * v.imag() - u.imag() * v.real());
}

}  // namespace

Mesh build_mesh(const ChartCurve& inner, const ChartCurve& outer, double h_mesh) {
  if (!(h_mesh > 0.0)) throw PreconditionError("h_mesh must be positive");
  const StarCurve in(inner), out(outer);

  // Target spacing along rings and between rings for near-equilateral cells.
  const double t = 0.72 * h_mesh;
  const double rho = 0.5 * std::sqrt(3.0) * t;

  int grid = 4096;
  std::vector<double> th, a, b;
  auto fill = [&](int g) {
    th.resize(g);
    a.resize(g);
    b.resize(g);
    for (int k = 0; k < g; ++k) {
      th[k] = 2.0 * pi * k / g;
      a[k] = in.radius(th[k]);
      b[k] = out.radius(th[k]);
      if (!(b[k] - a[k] > 1e-9)) throw DomainError("inner and outer boundaries touch or cross");
    }
  };
  fill(grid);
  double outer_len = 0.0;
  for (int k = 0; k < grid; ++k) outer_len += std::abs(std::polar(b[(k + 1) % grid], th[(k + 1) % grid]) - std::polar(b[k], th[k]));
  const int need = 16 * static_cast<int>(std::ceil(outer_len / t));
  if (need > grid) fill(grid = need);

  double max_gap = 0.0;
  for (int k = 0; k < grid; ++k) max_gap = std::max(max_gap, b[k] - a[k]);
  const int layers = std::max(1, static_cast<int>(std::ceil(max_gap / rho)));

  Mesh mesh;
  mesh.h_mesh = h_mesh;
  std::vector<int> ring_start, ring_size;
  std::vector<double> cum(grid + 1);
  for (int k = 0; k <= layers; ++k) {
    const double s = static_cast<double>(k) / layers;
    auto grid_point = [&](int g) {
      const int q = g % grid;
      return std::polar(a[q] + s * (b[q] - a[q]), th[q]);
    };
    cum[0] = 0.0;
    for (int g = 0; g < grid; ++g) cum[g + 1] = cum[g] + std::abs(grid_point(g + 1) - grid_point(g));
    const double len = cum[grid];
    const int n = std::max(6, static_cast<int>(std::ceil(len / t)));
    const double shift = (k % 2) ? 0.5 : 0.0;
    ring_start.push_back(static_cast<int>(mesh.vertices.size()));
    ring_size.push_back(n);
    for (int m = 0; m < n; ++m) {
      const double target = (m + shift) * len / n;
      const auto it = std::upper_bound(cum.begin(), cum.end(), target);
      const int g = std::clamp(static_cast<int>(it - cum.begin()) - 1, 0, grid - 1);
      const double frac = (target - cum[g]) / (cum[g + 1] - cum[g]);
      const double theta = 2.0 * pi * (g + frac) / grid;
      double r;
      if (k == 0) {
        r = in.radius(theta);
      } else if (k == layers) {
        r = out.radius(theta);
      } else {
        const double ra = in.radius(theta);
        r = ra + s * (out.radius(theta) - ra);
      }
      mesh.vertices.push_back(std::polar(r, theta));
      mesh.dirichlet.push_back(k == 0 ? 1 : 0);
    }
  }

  auto add_triangle = [&](int p, int q, int r) {
    if (signed_area(mesh.vertices[p], mesh.vertices[q], mesh.vertices[r]) < 0.0) std::swap(q, r);
    mesh.triangles.push_back({p, q, r});
  };
  for (int k = 0; k < layers; ++k) {
    const int sa = ring_start[k], na = ring_size[k];
    const int sb = ring_start[k + 1], nb = ring_size[k + 1];
    auto A = [&](int i) { return sa + i % na; };
    auto B = [&](int j) { return sb + j % nb; };
    int i = 0, j = 0;
    while (i < na || j < nb) {
      bool advance_a;
      if (i == na) {
        advance_a = false;
      } else if (j == nb) {
        advance_a = true;
      } else {
        const double da = std::abs(mesh.vertices[A(i + 1)] - mesh.vertices[B(j)]);
        const double db = std::abs(mesh.vertices[A(i)] - mesh.vertices[B(j + 1)]);
        advance_a = da <= db;
      }
      if (advance_a) {
        add_triangle(A(i), A(i + 1), B(j));
        ++i;
      } else {
        add_triangle(A(i), B(j + 1), B(j));
        ++j;
      }
    }
  }

  auto add_loop = [&](int k, BoundaryTag tag) {
    for (int m = 0; m < ring_size[k]; ++m) {
      mesh.boundary_edges.push_back({ring_start[k] + m, ring_start[k] + (m + 1) % ring_size[k]});
      mesh.edge_tags.push_back(tag);
    }
  };
  add_loop(0, BoundaryTag::Dirichlet);
  add_loop(layers, BoundaryTag::Neumann);
  return mesh;
}

Mesh build_mesh(const AnnularDomain2D& dom, double h_mesh) {
  return build_mesh(dom.inner_curve(), dom.outer_curve(), h_mesh);
}

MeshQuality mesh_quality(const Mesh& mesh) {
  MeshQuality q;
  double min_cos_angle = -1.0;  // largest cosine = smallest angle
  for (const auto& tri : mesh.triangles) {
    for (int e = 0; e < 3; ++e) {
      const Complex p = mesh.vertices[tri[e]];
      const Complex u = mesh.vertices[tri[(e + 1) % 3]] - p;
      const Complex v = mesh.vertices[tri[(e + 2) % 3]] - p;
      q.max_edge = std::max(q.max_edge, std::abs(u));
      const double c = (u.real() * v.real() + u.imag() * v.imag()) / (std::abs(u) * std::abs(v));
      min_cos_angle = std::max(min_cos_angle, c);
    }
  }
  q.min_angle_deg = std::acos(std::clamp(min_cos_angle, -1.0, 1.0)) * 180.0 / pi;

  std::vector<int> parent(mesh.vertices.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::vector<char> on_boundary(mesh.vertices.size(), 0);
  for (const auto& e : mesh.boundary_edges) {
    parent[find(e[0])] = find(e[1]);
    on_boundary[e[0]] = on_boundary[e[1]] = 1;
  }
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v)
    if (on_boundary[v] && find(static_cast<int>(v)) == static_cast<int>(v)) ++q.boundary_loops;
  return q;
}

void write_mesh(std::ostream& os, const Mesh& mesh) {
  os << "vertices " << mesh.vertices.size() << '\n';
  for (const Complex& z : mesh.vertices) os << fmt_double(z.real()) << ' ' << fmt_double(z.imag()) << '\n';
  os << "triangles " << mesh.triangles.size() << '\n';
  for (const auto& t : mesh.triangles) os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  os << "edges " << mesh.boundary_edges.size() << '\n';
  for (std::size_t e = 0; e < mesh.boundary_edges.size(); ++e)
    os << mesh.boundary_edges[e][0] << ' ' << mesh.boundary_edges[e][1] << ' '
       << (mesh.edge_tags[e] == BoundaryTag::Dirichlet ? 'D' : 'N') << '\n';
  os << "h_mesh " << fmt_double(mesh.h_mesh) << '\n';
}

Mesh read_mesh(std::istream& is) {
  auto expect = [&](const char* key) {
    std::string word;
    std::size_t n = 0;
    if (!(is >> word >> n) || word != key) throw ParseError(std::string("mesh file: expected '") + key + "'");
    return n;
  };
  Mesh mesh;
  const std::size_t nv = expect("vertices");
  mesh.vertices.resize(nv);
  mesh.dirichlet.assign(nv, 0);
  for (auto& z : mesh.vertices) {
    double x, y;
    if (!(is >> x >> y)) throw ParseError("mesh file: bad vertex line");
    z = {x, y};
  }
  auto check = [&](int v) {
    if (v < 0 || static_cast<std::size_t>(v) >= nv) throw ParseError("mesh file: vertex index out of range");
  };
  mesh.triangles.resize(expect("triangles"));
  for (auto& t : mesh.triangles) {
    if (!(is >> t[0] >> t[1] >> t[2])) throw ParseError("mesh file: bad triangle line");
    for (int v : t) check(v);
  }
  const std::size_t ne = expect("edges");
  for (std::size_t e = 0; e < ne; ++e) {
    int a, b;
    char tag;
    if (!(is >> a >> b >> tag) || (tag != 'D' && tag != 'N')) throw ParseError("mesh file: bad edge line");
    check(a);
    check(b);
    mesh.boundary_edges.push_back({a, b});
    mesh.edge_tags.push_back(tag == 'D' ? BoundaryTag::Dirichlet : BoundaryTag::Neumann);
    if (tag == 'D') mesh.dirichlet[a] = mesh.dirichlet[b] = 1;
  }
  std::string word;
  if (is >> word && word == "h_mesh") is >> mesh.h_mesh;
  return mesh;
}

}  // namespace hyperrfk
