#pragma once

namespace multisol {

/// Ellipse x^2/a^2 + y^2/b^2 <= 1, parametrized by x = a r cos(theta), y = b r sin(theta).
/// theta is the parametric angle of that map throughout the library.
class EllipseDomain {
 public:
  EllipseDomain(double a, double b);

  double a() const { return a_; }
  double b() const { return b_; }
  bool is_disk() const { return a_ == 1.0 && b_ == 1.0; }
  bool is_circular() const { return a_ == b_; }
  double area() const;

  friend bool operator==(const EllipseDomain&, const EllipseDomain&) = default;

 private:
  double a_;
  double b_;
};

/// Variable coefficients of the mapped Laplacian.
struct OmegaCoefficients {
  double w1;
  double w2;
  double w3;
};

OmegaCoefficients omega_coeffs(const EllipseDomain& dom, double theta);

struct Point2 {
  double x;
  double y;
};

Point2 map_to_cartesian(const EllipseDomain& dom, double r, double theta);

/// Curvature of the boundary curve (a cos(theta), b sin(theta)).
double boundary_curvature(const EllipseDomain& dom, double theta);

}  // namespace multisol
