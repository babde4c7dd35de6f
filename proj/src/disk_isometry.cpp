#include "hyperrfk/disk_isometry.hpp"

#include <cmath>

#include "hyperrfk/errors.hpp"

namespace hyperrfk {

DiskIsometry DiskIsometry::translation(Complex c) {
  const double n2 = std::norm(c);
  if (!(n2 < 1.0)) throw DomainError("translation target outside the Poincare disk");
  const double a = 1.0 / std::sqrt(1.0 - n2);
  return {Complex(a, 0.0), c * a};
}

DiskIsometry DiskIsometry::rotation(double angle) {
  return {std::polar(1.0, 0.5 * angle), Complex(0.0, 0.0)};
}

Complex DiskIsometry::apply(Complex z) const {
  return (a_ * z + b_) / (std::conj(b_) * z + std::conj(a_));
}

DiskIsometry DiskIsometry::compose(const DiskIsometry& other) const {
  // Matrix product [[a, b], [conj b, conj a]] * [[a', b'], [conj b', conj a']].
  return {a_ * other.a_ + b_ * std::conj(other.b_), a_ * other.b_ + b_ * std::conj(other.a_)};
}

DiskIsometry DiskIsometry::inverse() const { return {std::conj(a_), -b_}; }

Placement Placement::at_distance(double distance, double direction, double rotation) {
  const double rho = std::tanh(0.5 * distance);
  return {rho * std::cos(direction), rho * std::sin(direction), rotation};
}

Placement Placement::from_isometry(const DiskIsometry& g) {
  const Complex c = g.origin_image();
  const Complex e = DiskIsometry::translation(c).inverse().compose(g).apply(1.0);
  return {c.real(), c.imag(), std::arg(e)};
}

DiskIsometry Placement::isometry() const {
  return DiskIsometry::translation(Complex(x, y)).compose(DiskIsometry::rotation(rotation));
}

Complex disk_exp(Complex x, Complex e, double t) {
  // Move x to the origin, step radially, move back. The translation's
  // derivative at the origin is a positive real, so directions are kept.
  const auto to_x = DiskIsometry::translation(x);
  return to_x.apply(std::tanh(0.5 * t) * e / std::abs(e));
}

}  // namespace hyperrfk
