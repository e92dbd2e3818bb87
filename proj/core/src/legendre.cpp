#include "multisol/legendre.hpp"

#include <cmath>
#include <numbers>

#include "multisol/errors.hpp"

namespace multisol::legendre {

ValueAndDerivative eval(int degree, double t) {
  if (degree < 0) throw ArgumentError("legendre::eval: negative degree");
  if (degree == 0) return {1.0, 0.0};
  // L_n' = L_{n-2}' + (2n - 1) L_{n-1} keeps the endpoint values exact.
  double p_prev = 1.0, p = t;
  double d_prev = 0.0, d = 1.0;
  for (int n = 2; n <= degree; ++n) {
    const double p_next = ((2.0 * n - 1.0) * t * p - (n - 1.0) * p_prev) / n;
    const double d_next = d_prev + (2.0 * n - 1.0) * p;
    p_prev = p;
    p = p_next;
    d_prev = d;
    d = d_next;
  }
  return {p, d};
}

void eval_all(int max_degree, double t, std::span<double> values, std::span<double> derivatives) {
  if (max_degree < 0) throw ArgumentError("legendre::eval_all: negative degree");
  if (values.size() < static_cast<std::size_t>(max_degree + 1) ||
      derivatives.size() < static_cast<std::size_t>(max_degree + 1))
    throw ArgumentError("legendre::eval_all: output span too small");
  values[0] = 1.0;
  derivatives[0] = 0.0;
  if (max_degree == 0) return;
  values[1] = t;
  derivatives[1] = 1.0;
  for (int n = 2; n <= max_degree; ++n) {
    values[n] = ((2.0 * n - 1.0) * t * values[n - 1] - (n - 1.0) * values[n - 2]) / n;
    derivatives[n] = derivatives[n - 2] + (2.0 * n - 1.0) * values[n - 1];
  }
}

QuadratureRule gauss_rule(int n) {
  if (n < 1) throw ArgumentError("gauss_rule: n must be >= 1");
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Chebyshev guess for the i-th largest root.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    ValueAndDerivative ld{};
    for (int it = 0; it < 100; ++it) {
      ld = eval(n, x);
      const double dx = ld.value / ld.derivative;
      x -= dx;
      if (std::abs(dx) <= 1e-15) break;
    }
    ld = eval(n, x);
    const double w = 2.0 / ((1.0 - x * x) * ld.derivative * ld.derivative);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

RadialBasis::RadialBasis(RadialKind kind, int size) : kind_(kind), size_(size) {
  if (size < 1) throw ArgumentError("RadialBasis: size must be >= 1");
}

int RadialBasis::max_degree() const {
  switch (kind_) {
    case RadialKind::InteriorDirichlet:
      return size_ + 1;
    case RadialKind::OuterDirichlet:
    case RadialKind::CenterZero:
      return size_;
    case RadialKind::Unconstrained:
      return size_ - 1;
  }
  return size_ + 1;
}

double RadialBasis::normalization(int j) const {
  return kind_ == RadialKind::InteriorDirichlet ? 1.0 / std::sqrt(4.0 * j + 6.0) : 1.0;
}

ValueAndDerivative RadialBasis::eval(int j, double t) const {
  if (j < 0 || j >= size_) throw ArgumentError("RadialBasis::eval: index out of range");
  switch (kind_) {
    case RadialKind::InteriorDirichlet: {
      const auto lo = legendre::eval(j, t);
      const auto hi = legendre::eval(j + 2, t);
      const double c = normalization(j);
      return {c * (lo.value - hi.value), c * (lo.derivative - hi.derivative)};
    }
    case RadialKind::OuterDirichlet: {
      const auto lo = legendre::eval(j, t);
      const auto hi = legendre::eval(j + 1, t);
      return {lo.value - hi.value, lo.derivative - hi.derivative};
    }
    case RadialKind::CenterZero: {
      const auto lo = legendre::eval(j, t);
      const auto hi = legendre::eval(j + 1, t);
      return {lo.value + hi.value, lo.derivative + hi.derivative};
    }
    case RadialKind::Unconstrained:
      return legendre::eval(j, t);
  }
  return {0.0, 0.0};
}

void RadialBasis::eval_all(double t, std::span<double> values, std::span<double> derivatives) const {
  if (values.size() < static_cast<std::size_t>(size_) || derivatives.size() < static_cast<std::size_t>(size_))
    throw ArgumentError("RadialBasis::eval_all: output span too small");
  const int deg = max_degree();
  std::vector<double> lv(deg + 1), ld(deg + 1);
  legendre::eval_all(deg, t, lv, ld);
  for (int j = 0; j < size_; ++j) {
    switch (kind_) {
      case RadialKind::InteriorDirichlet: {
        const double c = normalization(j);
        values[j] = c * (lv[j] - lv[j + 2]);
        derivatives[j] = c * (ld[j] - ld[j + 2]);
        break;
      }
      case RadialKind::OuterDirichlet:
        values[j] = lv[j] - lv[j + 1];
        derivatives[j] = ld[j] - ld[j + 1];
        break;
      case RadialKind::CenterZero:
        values[j] = lv[j] + lv[j + 1];
        derivatives[j] = ld[j] + ld[j + 1];
        break;
      case RadialKind::Unconstrained:
        values[j] = lv[j];
        derivatives[j] = ld[j];
        break;
    }
  }
}

int bandwidth(ClosedForm which) {
  switch (which) {
    case ClosedForm::A:
    case ClosedForm::B:
      return 1;
    case ClosedForm::C:
      return 3;
    case ClosedForm::D:
      return 0;
    case ClosedForm::E:
      return 2;
  }
  return 0;
}

double matrix_entry(ClosedForm which, int i, int j) {
  if (i < 0 || j < 0) throw ArgumentError("matrix_entry: negative index");
  if (j < i) std::swap(i, j);
  const int d = j - i;
  if (d > bandwidth(which)) return 0.0;
  const double x = i;
  switch (which) {
    case ClosedForm::A:
      return d == 0 ? 4 * x + 6 : 2 * x + 4;
    case ClosedForm::B:
      return d == 0 ? 2 * (2 * x + 3) / ((x + 1) * (x + 2)) : -2 / (x + 2);
    case ClosedForm::C:
      switch (d) {
        case 0:
          return 2 / (2 * x + 1) + 2 / (2 * x + 5);
        case 1:
          return 2 / ((2 * x + 1) * (2 * x + 5)) + 2 * (x + 3) / ((2 * x + 5) * (2 * x + 7));
        case 2:
          return -2 / (2 * x + 5);
        default:
          return -4 * (x + 3) / (2 * (2 * x + 5) * (2 * x + 7));
      }
    case ClosedForm::D:
      return 2 * x + 2;
    case ClosedForm::E:
      switch (d) {
        case 0:
          return 4 * (x + 1) / ((2 * x + 1) * (2 * x + 3));
        case 1:
          // Positive: direct integration of (t+1)(L_i - L_{i+1})(L_{i+1} - L_{i+2}).
          return 4 / ((2 * x + 1) * (2 * x + 3) * (2 * x + 5));
        default:
          return -2 * (x + 2) / ((2 * x + 3) * (2 * x + 5));
      }
  }
  return 0.0;
}

BandMatrix::BandMatrix(int size, int bandwidth)
    : size_(size), bandwidth_(bandwidth), diagonals_(static_cast<std::size_t>(size) * (bandwidth + 1), 0.0) {
  if (size < 0 || bandwidth < 0) throw ArgumentError("BandMatrix: negative dimension");
}

double BandMatrix::operator()(int i, int j) const {
  if (j < i) std::swap(i, j);
  const int d = j - i;
  if (d > bandwidth_ || j >= size_) return 0.0;
  return diagonals_[static_cast<std::size_t>(d) * size_ + i];
}

void BandMatrix::set(int i, int j, double v) {
  if (j < i) std::swap(i, j);
  const int d = j - i;
  if (d > bandwidth_ || j >= size_) throw ArgumentError("BandMatrix::set: outside band");
  diagonals_[static_cast<std::size_t>(d) * size_ + i] = v;
}

Eigen::MatrixXd BandMatrix::to_dense() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(size_, size_);
  for (int d = 0; d <= bandwidth_; ++d)
    for (int i = 0; i + d < size_; ++i) {
      const double v = (*this)(i, i + d);
      m(i, i + d) = v;
      m(i + d, i) = v;
    }
  return m;
}

BandMatrix closed_form_matrix(ClosedForm which, int size) {
  BandMatrix m(size, bandwidth(which));
  for (int i = 0; i < size; ++i)
    for (int j = i; j <= std::min(size - 1, i + bandwidth(which)); ++j) m.set(i, j, matrix_entry(which, i, j));
  return m;
}

}  // namespace multisol::legendre
