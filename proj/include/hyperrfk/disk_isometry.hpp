#pragma once

#include <complex>

namespace hyperrfk {

using Complex = std::complex<double>;

/// Orientation-preserving isometry of the Poincare disk,
/// z -> (a z + b) / (conj(b) z + conj(a)) with |a|^2 - |b|^2 = 1.
class DiskIsometry {
 public:
  DiskIsometry() = default;

  static DiskIsometry identity() { return {}; }
  /// Hyperbolic translation carrying 0 to c along the diameter through c.
  static DiskIsometry translation(Complex c);
  static DiskIsometry rotation(double angle);

  Complex apply(Complex z) const;
  /// (*this)(other(z)).
  DiskIsometry compose(const DiskIsometry& other) const;
  DiskIsometry inverse() const;

  /// Image of the origin.
  Complex origin_image() const { return apply(0.0); }

 private:
  DiskIsometry(Complex a, Complex b) : a_(a), b_(b) {}
  Complex a_{1.0, 0.0};
  Complex b_{0.0, 0.0};
};

/// Placement of a body's base point and orientation in the disk chart.
struct Placement {
  double x = 0.0;
  double y = 0.0;
  double rotation = 0.0;

  /// Base point at hyperbolic distance `distance` from the origin in direction `direction`.
  static Placement at_distance(double distance, double direction = 0.0, double rotation = 0.0);
  /// Decomposition g = translation(g(0)) o rotation(angle).
  static Placement from_isometry(const DiskIsometry& g);

  DiskIsometry isometry() const;
};

/// Exponential map of the disk: the point at hyperbolic distance t from x
/// along the Euclidean unit direction e (directions agree by conformality).
Complex disk_exp(Complex x, Complex e, double t);

}  // namespace hyperrfk
