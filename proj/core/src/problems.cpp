#include "multisol/problems.hpp"

#include <cmath>

#include "multisol/errors.hpp"

namespace multisol {

const char* to_string(BoundaryCondition bc) {
  return bc == BoundaryCondition::Dirichlet ? "dirichlet" : "neumann";
}

BoundaryCondition parse_boundary_condition(const std::string& s) {
  if (s == "dirichlet" || s == "Dirichlet") return BoundaryCondition::Dirichlet;
  if (s == "neumann" || s == "Neumann") return BoundaryCondition::Neumann;
  throw ArgumentError("unknown boundary condition '" + s + "'");
}

ProblemSpec sine_gordon(double lambda, BoundaryCondition bc) {
  if (!(lambda > 0.0)) throw ArgumentError("sine_gordon: lambda must be positive");
  ProblemSpec p;
  p.name = "sine-gordon";
  p.scale = lambda;
  p.bc = bc;
  p.f = [lambda](Point2, double u) { return lambda * std::sin(u); };
  p.f_u = [lambda](Point2, double u) { return lambda * std::cos(u); };
  p.f_uu = [lambda](Point2, double u) { return -lambda * std::sin(u); };
  p.potential = [lambda](Point2, double u) { return lambda * (1.0 - std::cos(u)); };
  return p;
}

ProblemSpec henon_cubic() {
  ProblemSpec p;
  p.name = "henon";
  p.polynomial_degree = 3;
  p.f = [](Point2, double u) { return u * u * u; };
  p.f_u = [](Point2, double u) { return 3.0 * u * u; };
  p.f_uu = [](Point2, double u) { return 6.0 * u; };
  p.potential = [](Point2, double u) { return 0.25 * u * u * u * u; };
  return p;
}

ProblemSpec ginzburg_landau(double delta, BoundaryCondition bc) {
  if (!(delta > 0.0)) throw ArgumentError("ginzburg_landau: delta must be positive");
  ProblemSpec p;
  p.name = "ginzburg-landau";
  p.scale = delta;
  p.stiffness_scale = delta;
  p.bc = bc;
  p.polynomial_degree = 3;
  p.f = [](Point2, double u) { return u * u * u - u; };
  p.f_u = [](Point2, double u) { return 3.0 * u * u - 1.0; };
  p.f_uu = [](Point2, double u) { return 6.0 * u; };
  // J = int delta/2 |grad u|^2 + u^2/2 - u^4/4.
  p.potential = [](Point2, double u) { return 0.25 * u * u * u * u - 0.5 * u * u; };
  return p;
}

ProblemSpec poisson(std::function<double(Point2)> source, BoundaryCondition bc) {
  ProblemSpec p;
  p.name = "poisson";
  p.bc = bc;
  p.f = [source](Point2 x, double) { return source(x); };
  p.f_u = [](Point2, double) { return 0.0; };
  p.f_uu = [](Point2, double) { return 0.0; };
  p.potential = [source](Point2 x, double u) { return source(x) * u; };
  return p;
}

ProblemSpec linear_reaction(double mu, BoundaryCondition bc) {
  ProblemSpec p;
  p.name = "linear";
  p.polynomial_degree = 1;
  p.scale = mu;
  p.bc = bc;
  p.f = [mu](Point2, double u) { return mu * u; };
  p.f_u = [mu](Point2, double) { return mu; };
  p.f_uu = [](Point2, double) { return 0.0; };
  p.potential = [mu](Point2, double u) { return 0.5 * mu * u * u; };
  return p;
}

ProblemSpec make_problem(const std::string& name, double parameter, BoundaryCondition bc) {
  if (name == "sine-gordon") return sine_gordon(parameter, bc);
  if (name == "henon") {
    if (bc != BoundaryCondition::Dirichlet) throw ArgumentError("henon: only the Dirichlet problem is defined");
    return henon_cubic();
  }
  if (name == "ginzburg-landau") return ginzburg_landau(parameter, bc);
  throw ArgumentError("unknown problem '" + name + "'");
}

}  // namespace multisol
