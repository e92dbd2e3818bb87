#include "multisol/geometry.hpp"

#include <cmath>
#include <numbers>

#include "multisol/errors.hpp"

namespace multisol {

EllipseDomain::EllipseDomain(double a, double b) : a_(a), b_(b) {
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b))
    throw ArgumentError("EllipseDomain: semi-axes must be positive and finite");
}

double EllipseDomain::area() const { return std::numbers::pi * a_ * b_; }

OmegaCoefficients omega_coeffs(const EllipseDomain& dom, double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  const double ia2 = 1.0 / (dom.a() * dom.a()), ib2 = 1.0 / (dom.b() * dom.b());
  return {c * c * ia2 + s * s * ib2, c * c * ib2 + s * s * ia2, std::sin(2.0 * theta) * (ia2 - ib2)};
}

Point2 map_to_cartesian(const EllipseDomain& dom, double r, double theta) {
  if (!(r >= 0.0 && r <= 1.0)) throw ArgumentError("map_to_cartesian: r must lie in [0, 1]");
  return {dom.a() * r * std::cos(theta), dom.b() * r * std::sin(theta)};
}

double boundary_curvature(const EllipseDomain& dom, double theta) {
  const double a = dom.a(), b = dom.b();
  const double s = std::sin(theta), c = std::cos(theta);
  const double q = a * a * s * s + b * b * c * c;
  return a * b / (q * std::sqrt(q));
}

}  // namespace multisol
