#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <vector>

#include "hyperrfk/bodies.hpp"
#include "hyperrfk/disk_isometry.hpp"

namespace hyperrfk {

/// Closed counter-clockwise chart curve parametrized over [0, 2 pi).
using ChartCurve = std::function<Complex(double)>;

/// A chart curve that is star-shaped about the origin, re-expressed as a
/// Euclidean polar graph rho(theta).
class StarCurve {
 public:
  explicit StarCurve(ChartCurve curve, int table_size = 4096);

  double radius(double theta) const;
  Complex point(double theta) const { return std::polar(radius(theta), theta); }
  /// True when z lies strictly inside the curve.
  bool contains(Complex z) const { return std::abs(z) < radius(std::arg(z)); }
  const ChartCurve& curve() const noexcept { return curve_; }

 private:
  ChartCurve curve_;
  std::vector<double> phi_;    // curve parameter
  std::vector<double> theta_;  // unwrapped polar angle, strictly increasing
};

/// Doubly connected domain Omega_N minus closure(Omega_D) in H^2.
struct AnnularDomain2D {
  Body2D inner;
  Body2D outer;
  Placement inner_at{};
  Placement outer_at{};

  static AnnularDomain2D concentric(double r, double R);
  /// Ball hole of radius r whose centre sits at hyperbolic distance `offset`
  /// from the centre of the ball of radius R.
  static AnnularDomain2D offset_ball(double r, double R, double offset);

  /// Isometry taking the hole's base point to the origin and its frame to the chart axes.
  DiskIsometry to_canonical() const { return inner_at.isometry().inverse(); }
  /// Boundary curves in the canonical frame.
  ChartCurve inner_curve() const;
  ChartCurve outer_curve() const;

  bool is_concentric_annulus(double tol = 1e-12) const;
  /// |Omega_N| - |Omega_D| from boundary quadrature.
  double area() const;
  /// Same domain moved by an isometry g of the disk.
  AnnularDomain2D moved(const DiskIsometry& g) const;
};

enum class BoundaryTag { Dirichlet, Neumann };

struct Mesh {
  std::vector<Complex> vertices;
  std::vector<std::array<int, 3>> triangles;  // counter-clockwise
  std::vector<std::array<int, 2>> boundary_edges;
  std::vector<BoundaryTag> edge_tags;
  std::vector<char> dirichlet;  // per vertex
  double h_mesh = 0.0;

  std::size_t num_vertices() const noexcept { return vertices.size(); }
};

struct MeshQuality {
  double min_angle_deg = 0.0;
  double max_edge = 0.0;
  int boundary_loops = 0;
};

/// Ring mesh of the region between two star-shaped curves (inner curve
/// Dirichlet, outer Neumann). Rings follow the polar interpolation between
/// the two boundaries; neighbouring rings are joined by shortest-diagonal
/// zipping. Throws DomainError if the curves touch or cross.
Mesh build_mesh(const ChartCurve& inner, const ChartCurve& outer, double h_mesh);
Mesh build_mesh(const AnnularDomain2D& dom, double h_mesh);

MeshQuality mesh_quality(const Mesh& mesh);

/// Plain text: "vertices N" + N lines "x y", "triangles M" + M lines
/// "a b c", "edges E" + E lines "a b tag" with tag D or N.
void write_mesh(std::ostream& os, const Mesh& mesh);
Mesh read_mesh(std::istream& is);

}  // namespace hyperrfk
