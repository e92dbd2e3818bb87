#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "multisol/geometry.hpp"
#include "multisol/legendre.hpp"
#include "multisol/problems.hpp"

namespace multisol {

/// Coefficients of the Legendre-Fourier expansion
///   u(t, theta) = sum_{i=1..M} sum_{j=0..N-2} (alpha_ij sin(i theta) + beta_ij cos(i theta)) P_j(t)
///               + sum_{l=0..N-1} gamma_l Q_l(t)
/// Flat layout: alpha_{1,0..N-2}, ..., alpha_{M,*}, beta (same order), gamma_{0..N-1}.
class SpectralCoefficients {
 public:
  SpectralCoefficients(int M, int N);
  SpectralCoefficients(int M, int N, Eigen::VectorXd flat);

  static int flat_size(int M, int N) { return 2 * M * (N - 1) + N; }

  int M() const { return M_; }
  int N() const { return N_; }
  int size() const { return static_cast<int>(flat_.size()); }

  int alpha_index(int i, int j) const { return (i - 1) * (N_ - 1) + j; }
  int beta_index(int i, int j) const { return M_ * (N_ - 1) + (i - 1) * (N_ - 1) + j; }
  int gamma_index(int l) const { return 2 * M_ * (N_ - 1) + l; }

  double alpha(int i, int j) const { return flat_[alpha_index(i, j)]; }
  double beta(int i, int j) const { return flat_[beta_index(i, j)]; }
  double gamma(int l) const { return flat_[gamma_index(l)]; }
  double& alpha(int i, int j) { return flat_[alpha_index(i, j)]; }
  double& beta(int i, int j) { return flat_[beta_index(i, j)]; }
  double& gamma(int l) { return flat_[gamma_index(l)]; }

  const Eigen::VectorXd& flat() const { return flat_; }
  Eigen::VectorXd& flat() { return flat_; }

 private:
  int M_;
  int N_;
  Eigen::VectorXd flat_;
};

/// Quadrature grid sizes; zero selects the default: 2N + 2 Gauss points, and max(4, d + 1) M + 4
/// angles for a polynomial nonlinearity of degree d, 8M + 8 otherwise.
struct QuadratureSizes {
  int radial = 0;
  int angular = 0;
};

struct PolarPoint {
  double r;
  double theta;
};

/// Galerkin discretization of  s Lap(u) + f(x, u) = 0  on an ellipse.
///
/// The residual is the gradient of the discrete functional:
///   F(xi) = s K xi - int f(x, u) psi dx,   J(xi) = s/2 xi^T K xi - int V(x, u) dx,
/// with K the Dirichlet-form matrix of the mapped basis, assembled from tensor products of
/// Fourier couplings (through omega_1..3) and radial matrices. Nonlinear terms are evaluated
/// pseudo-spectrally on a Gauss x equispaced grid.
///
/// Immutable after construction.
class DiscreteProblem {
 public:
  DiscreteProblem(EllipseDomain domain, ProblemSpec problem, int M, int N, QuadratureSizes quad = {});

  const EllipseDomain& domain() const { return domain_; }
  const ProblemSpec& problem() const { return problem_; }
  int M() const { return M_; }
  int N() const { return N_; }
  int size() const { return n_; }
  int radial_points() const { return static_cast<int>(t_nodes_.size()); }
  int angular_points() const { return static_cast<int>(theta_nodes_.size()); }

  /// Radial families: the k != 0 modes and the axisymmetric mode.
  const legendre::RadialBasis& mode_basis() const { return mode_basis_; }
  const legendre::RadialBasis& axis_basis() const { return axis_basis_; }

  /// Dirichlet-form matrix of -Lap (without the stiffness scale).
  const Eigen::MatrixXd& stiffness() const { return stiffness_; }
  /// L2(Omega) Gram matrix of the basis.
  const Eigen::MatrixXd& mass() const { return mass_; }

  Eigen::VectorXd residual(const Eigen::VectorXd& xi) const;
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& xi) const;
  /// sum_i y_i Hess(F_i)(xi); needs f_uu.
  Eigen::MatrixXd second_order_term(const Eigen::VectorXd& xi, const Eigen::VectorXd& y) const;
  double functional(const Eigen::VectorXd& xi) const;

  /// u on the quadrature grid, rows = radial nodes, columns = angles.
  Eigen::MatrixXd grid_values(const Eigen::VectorXd& xi) const;
  double evaluate(const Eigen::VectorXd& xi, double r, double theta) const;
  std::vector<double> evaluate_field(const Eigen::VectorXd& xi, std::span<const PolarPoint> points) const;
  /// Gradient (u_x, u_y) in physical coordinates at an interior point (r > 0).
  Point2 gradient(const Eigen::VectorXd& xi, double r, double theta) const;

  /// L2(Omega) projection of a field given in (r, theta).
  template <typename Field>
  Eigen::VectorXd project(Field&& field) const {
    Eigen::MatrixXd g(radial_points(), angular_points());
    for (int i = 0; i < radial_points(); ++i)
      for (int p = 0; p < angular_points(); ++p)
        g(i, p) = weights_(i, p) * field(0.5 * (t_nodes_[i] + 1.0), theta_nodes_[p]);
    return mass_llt_.solve(project_grid(g));
  }

  /// Same discretization on another domain or with another problem.
  DiscreteProblem with_domain(const EllipseDomain& domain) const;
  DiscreteProblem with_problem(ProblemSpec problem) const;
  DiscreteProblem with_quadrature(QuadratureSizes quad) const;

  /// sum_q g_q psi(q): integrates weighted grid data against every basis function.
  Eigen::VectorXd project_grid(const Eigen::MatrixXd& g) const;
  /// sum_q g_q psi_i(q) psi_j(q).
  Eigen::MatrixXd weighted_gram(const Eigen::MatrixXd& g) const;
  /// Quadrature weights on the grid (area element included).
  const Eigen::MatrixXd& weights() const { return weights_; }

 private:
  void build_tables();
  void build_linear_operators();

  int block_count() const { return 2 * M_ + 1; }
  int block_offset(int m) const;
  int block_size(int m) const { return m == 2 * M_ ? N_ : N_ - 1; }
  const Eigen::MatrixXd& block_radial_table(int m) const { return m == 2 * M_ ? axis_values_ : mode_values_; }

  EllipseDomain domain_;
  ProblemSpec problem_;
  int M_;
  int N_;
  int n_;
  QuadratureSizes quad_;
  legendre::RadialBasis mode_basis_;
  legendre::RadialBasis axis_basis_;

  std::vector<double> t_nodes_;
  std::vector<double> theta_nodes_;
  Eigen::MatrixXd mode_values_;  // n_t x (N-1)
  Eigen::MatrixXd axis_values_;  // n_t x N
  Eigen::MatrixXd fourier_;      // (2M+1) x n_theta: sin(i th), cos(i th), 1
  Eigen::MatrixXd weights_;      // n_t x n_theta
  std::vector<Point2> points_;   // row-major (i, p)

  Eigen::MatrixXd stiffness_;
  Eigen::MatrixXd mass_;
  Eigen::LLT<Eigen::MatrixXd> mass_llt_;
};

Eigen::VectorXd assemble_residual(const DiscreteProblem& dp, const SpectralCoefficients& xi);
Eigen::MatrixXd assemble_jacobian(const DiscreteProblem& dp, const SpectralCoefficients& xi);
double functional_value(const DiscreteProblem& dp, const SpectralCoefficients& xi);
std::vector<double> evaluate_field(const DiscreteProblem& dp, const SpectralCoefficients& xi,
                                   std::span<const PolarPoint> grid);

/// Smallest `count` eigenvalues of -Lap on the domain with the given boundary condition.
std::vector<double> linear_eigenvalues(const EllipseDomain& domain, BoundaryCondition bc, int M, int N, int count);

/// Radial families used for a boundary condition: {k != 0 modes, k = 0 mode}.
std::pair<legendre::RadialKind, legendre::RadialKind> radial_kinds(BoundaryCondition bc);

/// Radial matrix int w(t) P_i^(da)(t) Q_j^(db)(t) dt for two families, by Gauss quadrature.
/// weight: 0 -> (t+1), 1 -> 1/(t+1), 2 -> 1. da/db are derivative orders (0 or 1).
Eigen::MatrixXd radial_matrix(const legendre::RadialBasis& p, int da, const legendre::RadialBasis& q, int db,
                              int weight);

}  // namespace multisol
