#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace multisol::legendre {

struct ValueAndDerivative {
  double value;
  double derivative;
};

/// L_n(t) and L_n'(t) by the three-term recurrence. Exact at t = +-1.
ValueAndDerivative eval(int degree, double t);

/// Values and derivatives of L_0..L_max at t. Both spans need max_degree + 1 slots.
void eval_all(int max_degree, double t, std::span<double> values, std::span<double> derivatives);

/// n-point Gauss-Legendre rule on [-1, 1].
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  int order() const { return static_cast<int>(nodes.size()); }

  template <typename F>
  double integrate(F&& f) const {
    double sum = 0.0;
    for (std::size_t q = 0; q < nodes.size(); ++q) sum += weights[q] * f(nodes[q]);
    return sum;
  }
};

/// Nodes are the roots of L_n, found by Newton iteration from Chebyshev guesses.
QuadratureRule gauss_rule(int n);

/// Families of compact radial bases on t in [-1, 1] (t = 2r - 1).
enum class RadialKind {
  InteriorDirichlet,  ///< phi_j = c_j (L_j - L_{j+2}), zero at both ends
  OuterDirichlet,     ///< phi^_l = L_l - L_{l+1}, zero at t = 1
  Unconstrained,      ///< L_l, natural boundary at t = 1
  CenterZero,         ///< L_j + L_{j+1}, zero at t = -1 only (polar condition, natural at t = 1)
};

class RadialBasis {
 public:
  RadialBasis(RadialKind kind, int size);

  RadialKind kind() const { return kind_; }
  int size() const { return size_; }
  /// Highest Legendre degree used by any member.
  int max_degree() const;

  /// c_j = 1/sqrt(4j+6) for InteriorDirichlet, 1 otherwise.
  double normalization(int j) const;

  ValueAndDerivative eval(int j, double t) const;
  /// All members at t.
  void eval_all(double t, std::span<double> values, std::span<double> derivatives) const;

 private:
  RadialKind kind_;
  int size_;
};

/// The five t-direction matrices with closed-form entries.
///   A = int (t+1) phi_i' phi_j'    B = int phi_i phi_j / (t+1)   C = int (t+1) phi_i phi_j
///   D = int (t+1) phi^_i' phi^_j'  E = int (t+1) phi^_i phi^_j
/// with phi_j = L_j - L_{j+2} (unit normalization) and phi^_l = L_l - L_{l+1}.
enum class ClosedForm { A, B, C, D, E };

int bandwidth(ClosedForm which);

/// Closed-form entry, symmetric, zero outside the band.
double matrix_entry(ClosedForm which, int i, int j);

/// Symmetric banded storage: upper diagonals 0..bandwidth.
class BandMatrix {
 public:
  BandMatrix(int size, int bandwidth);

  int size() const { return size_; }
  int bandwidth() const { return bandwidth_; }

  double operator()(int i, int j) const;
  void set(int i, int j, double v);

  Eigen::MatrixXd to_dense() const;

 private:
  int size_;
  int bandwidth_;
  std::vector<double> diagonals_;  // diagonals_[d * size_ + i] = entry (i, i + d)
};

BandMatrix closed_form_matrix(ClosedForm which, int size);

}  // namespace multisol::legendre
