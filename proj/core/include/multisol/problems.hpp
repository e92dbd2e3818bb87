#pragma once

#include <functional>
#include <string>

#include "multisol/geometry.hpp"

namespace multisol {

enum class BoundaryCondition { Dirichlet, Neumann };

const char* to_string(BoundaryCondition bc);
BoundaryCondition parse_boundary_condition(const std::string& s);

/// A semilinear problem in the canonical form  s * Lap(u) + f(x, u) = 0,
/// with variational functional  J(u) = int ( s/2 |grad u|^2 - V(x, u) ) dx.
/// s is `stiffness_scale` (eps^2 or delta); V(x, u) = int_0^u f(x, v) dv.
struct ProblemSpec {
  using PointFunction = std::function<double(Point2 x, double u)>;

  std::string name;
  PointFunction f;
  PointFunction f_u;
  PointFunction f_uu;  ///< optional; only the Full Hessian mode needs it
  PointFunction potential;
  double scale = 1.0;  ///< lambda, delta, or 1
  double stiffness_scale = 1.0;
  BoundaryCondition bc = BoundaryCondition::Dirichlet;
  /// Degree of f in u when f is an x-independent polynomial, else 0. Sets the default angular grid.
  int polynomial_degree = 0;
};

/// Lap(u) + lambda sin(u) = 0.
ProblemSpec sine_gordon(double lambda, BoundaryCondition bc);

/// Lap(u) + u^3 = 0, Dirichlet.
ProblemSpec henon_cubic();

/// delta Lap(u) - u + u^3 = 0, i.e. f = u^3 - u with stiffness delta.
ProblemSpec ginzburg_landau(double delta, BoundaryCondition bc = BoundaryCondition::Dirichlet);

/// Lap(u) + g(x) = 0 (u-independent source); used for manufactured-solution checks.
ProblemSpec poisson(std::function<double(Point2)> source, BoundaryCondition bc = BoundaryCondition::Dirichlet);

/// Lap(u) + mu u = 0.
ProblemSpec linear_reaction(double mu, BoundaryCondition bc = BoundaryCondition::Dirichlet);

/// Lookup by CLI name: "sine-gordon", "henon", "ginzburg-landau". `parameter` is lambda or delta.
ProblemSpec make_problem(const std::string& name, double parameter, BoundaryCondition bc);

}  // namespace multisol
