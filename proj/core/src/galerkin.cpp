#include "multisol/galerkin.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "multisol/errors.hpp"

namespace multisol {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Fourier mode m of the flat layout at theta: value and derivative.
struct ModeValue {
  double value;
  double derivative;
};

ModeValue mode_value(int m, int M, double theta) {
  if (m < M) {
    const double k = m + 1;
    return {std::sin(k * theta), k * std::cos(k * theta)};
  }
  if (m < 2 * M) {
    const double k = m - M + 1;
    return {std::cos(k * theta), -k * std::sin(k * theta)};
  }
  return {1.0, 0.0};
}

}  // namespace

std::pair<legendre::RadialKind, legendre::RadialKind> radial_kinds(BoundaryCondition bc) {
  using legendre::RadialKind;
  if (bc == BoundaryCondition::Dirichlet) return {RadialKind::InteriorDirichlet, RadialKind::OuterDirichlet};
  return {RadialKind::CenterZero, RadialKind::Unconstrained};
}

SpectralCoefficients::SpectralCoefficients(int M, int N)
    : SpectralCoefficients(M, N, Eigen::VectorXd::Zero(M >= 1 && N >= 2 ? flat_size(M, N) : 0)) {}

SpectralCoefficients::SpectralCoefficients(int M, int N, Eigen::VectorXd flat) : M_(M), N_(N), flat_(std::move(flat)) {
  if (M < 1 || N < 2) throw ArgumentError("SpectralCoefficients: need M >= 1 and N >= 2");
  if (flat_.size() != flat_size(M, N)) throw ArgumentError("SpectralCoefficients: flat length does not match M, N");
}

Eigen::MatrixXd radial_matrix(const legendre::RadialBasis& p, int da, const legendre::RadialBasis& q, int db,
                              int weight) {
  const auto rule = legendre::gauss_rule(p.max_degree() + q.max_degree() + 2);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(p.size(), q.size());
  std::vector<double> pv(p.size()), pd(p.size()), qv(q.size()), qd(q.size());
  for (int k = 0; k < rule.order(); ++k) {
    const double t = rule.nodes[k];
    p.eval_all(t, pv, pd);
    q.eval_all(t, qv, qd);
    const double w = rule.weights[k] * (weight == 0 ? t + 1.0 : weight == 1 ? 1.0 / (t + 1.0) : 1.0);
    const auto& left = da ? pd : pv;
    const auto& right = db ? qd : qv;
    for (int i = 0; i < p.size(); ++i)
      for (int j = 0; j < q.size(); ++j) out(i, j) += w * left[i] * right[j];
  }
  return out;
}

DiscreteProblem::DiscreteProblem(EllipseDomain domain, ProblemSpec problem, int M, int N, QuadratureSizes quad)
    : domain_(domain),
      problem_(std::move(problem)),
      M_(M),
      N_(N),
      n_(M >= 1 && N >= 2 ? SpectralCoefficients::flat_size(M, N) : 0),
      quad_(quad),
      mode_basis_(radial_kinds(problem_.bc).first, std::max(N - 1, 1)),
      axis_basis_(radial_kinds(problem_.bc).second, std::max(N, 1)) {
  if (M < 1 || N < 2) throw ArgumentError("DiscreteProblem: need M >= 1 and N >= 2");
  if (!problem_.f || !problem_.potential) throw ArgumentError("DiscreteProblem: problem lacks f or V");
  const int min_t = (3 * N + 1) / 2 + 2;
  const int min_theta = 3 * M + 2;
  if (quad_.radial == 0) quad_.radial = 2 * N + 2;
  // Polynomial nonlinearities of degree d are integrated exactly in theta with (d + 1) M + 4
  // points; anything else gets a finer grid so aliasing stays below the solver tolerance.
  if (quad_.angular == 0)
    quad_.angular = problem_.polynomial_degree > 0 ? std::max(4, problem_.polynomial_degree + 1) * M + 4 : 8 * M + 8;
  if (quad_.radial < min_t || quad_.angular < min_theta)
    throw ArgumentError("DiscreteProblem: quadrature below the dealiasing floor");
  build_tables();
  build_linear_operators();
}

int DiscreteProblem::block_offset(int m) const {
  if (m < 2 * M_) return m * (N_ - 1);
  return 2 * M_ * (N_ - 1);
}

void DiscreteProblem::build_tables() {
  const auto rule = legendre::gauss_rule(quad_.radial);
  t_nodes_ = rule.nodes;
  const int nt = quad_.radial, nth = quad_.angular;
  theta_nodes_.resize(nth);
  for (int p = 0; p < nth; ++p) theta_nodes_[p] = kTwoPi * p / nth;

  mode_values_.resize(nt, N_ - 1);
  axis_values_.resize(nt, N_);
  std::vector<double> v(N_), d(N_);
  for (int i = 0; i < nt; ++i) {
    mode_basis_.eval_all(t_nodes_[i], v, d);
    for (int j = 0; j < N_ - 1; ++j) mode_values_(i, j) = v[j];
    axis_basis_.eval_all(t_nodes_[i], v, d);
    for (int j = 0; j < N_; ++j) axis_values_(i, j) = v[j];
  }

  fourier_.resize(block_count(), nth);
  for (int m = 0; m < block_count(); ++m)
    for (int p = 0; p < nth; ++p) fourier_(m, p) = mode_value(m, M_, theta_nodes_[p]).value;

  const double ab = domain_.a() * domain_.b();
  weights_.resize(nt, nth);
  points_.resize(static_cast<std::size_t>(nt) * nth);
  for (int i = 0; i < nt; ++i) {
    const double r = 0.5 * (t_nodes_[i] + 1.0);
    for (int p = 0; p < nth; ++p) {
      // dx = a b r dr dtheta, r = (t+1)/2, dr = dt/2.
      weights_(i, p) = ab * 0.25 * (t_nodes_[i] + 1.0) * rule.weights[i] * (kTwoPi / nth);
      points_[static_cast<std::size_t>(i) * nth + p] = map_to_cartesian(domain_, r, theta_nodes_[p]);
    }
  }
}

void DiscreteProblem::build_linear_operators() {
  using legendre::ClosedForm;
  const legendre::RadialBasis* fam[2] = {&mode_basis_, &axis_basis_};

  // R1 = int (t+1) P' Q', R2 = int P Q / (t+1), R3 = int P' Q, R0 = int (t+1) P Q.
  Eigen::MatrixXd R0[2][2], R1[2][2], R3[2][2], R2;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) {
      R0[x][y] = radial_matrix(*fam[x], 0, *fam[y], 0, 0);
      R1[x][y] = radial_matrix(*fam[x], 1, *fam[y], 1, 0);
      R3[x][y] = radial_matrix(*fam[x], 1, *fam[y], 0, 2);
    }
  R2 = radial_matrix(mode_basis_, 0, mode_basis_, 0, 1);

  if (problem_.bc == BoundaryCondition::Dirichlet) {
    // Banded closed forms for the unit-normalized families, rescaled by c_i c_j.
    const Eigen::MatrixXd A = legendre::closed_form_matrix(ClosedForm::A, N_ - 1).to_dense();
    const Eigen::MatrixXd B = legendre::closed_form_matrix(ClosedForm::B, N_ - 1).to_dense();
    const Eigen::MatrixXd C = legendre::closed_form_matrix(ClosedForm::C, N_ - 1).to_dense();
    Eigen::VectorXd c(N_ - 1);
    for (int j = 0; j < N_ - 1; ++j) c[j] = mode_basis_.normalization(j);
    R1[0][0] = c.asDiagonal() * A * c.asDiagonal();
    R2 = c.asDiagonal() * B * c.asDiagonal();
    R0[0][0] = c.asDiagonal() * C * c.asDiagonal();
    R1[1][1] = legendre::closed_form_matrix(ClosedForm::D, N_).to_dense();
    R0[1][1] = legendre::closed_form_matrix(ClosedForm::E, N_).to_dense();
  }

  // Fourier couplings; trigonometric integrands of degree <= 2M + 2 are integrated exactly.
  const int ne = 4 * M_ + 8;
  const int nb = block_count();
  Eigen::MatrixXd th0 = Eigen::MatrixXd::Zero(nb, nb), th1 = th0, th2 = th0, th3 = th0;
  std::vector<ModeValue> mv(nb);
  for (int e = 0; e < ne; ++e) {
    const double theta = kTwoPi * e / ne;
    const auto om = omega_coeffs(domain_, theta);
    const double w = kTwoPi / ne;
    for (int m = 0; m < nb; ++m) mv[m] = mode_value(m, M_, theta);
    for (int x = 0; x < nb; ++x)
      for (int y = 0; y < nb; ++y) {
        th0(x, y) += w * mv[x].value * mv[y].value;
        th1(x, y) += w * om.w1 * mv[x].value * mv[y].value;
        th2(x, y) += w * om.w2 * mv[x].derivative * mv[y].derivative;
        th3(x, y) += w * om.w3 * mv[x].value * mv[y].derivative;  // trial undifferentiated, test d/dtheta
      }
  }
  auto chop = [](Eigen::MatrixXd& m) {
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < m.size(); ++i)
      if (std::abs(m.data()[i]) < 1e-14 * scale) m.data()[i] = 0.0;
  };
  chop(th0);
  chop(th1);
  chop(th2);
  chop(th3);

  const double ab = domain_.a() * domain_.b();
  stiffness_ = Eigen::MatrixXd::Zero(n_, n_);
  mass_ = Eigen::MatrixXd::Zero(n_, n_);
  for (int a = 0; a < nb; ++a) {      // test block
    for (int b = 0; b < nb; ++b) {    // trial block
      const int fa = a == 2 * M_ ? 1 : 0, fb = b == 2 * M_ ? 1 : 0;
      auto K = stiffness_.block(block_offset(a), block_offset(b), block_size(a), block_size(b));
      if (th1(b, a) != 0.0) K += ab * th1(b, a) * R1[fb][fa].transpose();
      if (th2(b, a) != 0.0) K += ab * th2(b, a) * R2.transpose();
      if (th3(b, a) != 0.0) K -= 0.5 * ab * th3(b, a) * R3[fb][fa].transpose();
      if (th3(a, b) != 0.0) K -= 0.5 * ab * th3(a, b) * R3[fa][fb];
      if (th0(b, a) != 0.0)
        mass_.block(block_offset(a), block_offset(b), block_size(a), block_size(b)) +=
            0.25 * ab * th0(b, a) * R0[fb][fa].transpose();
    }
  }
  stiffness_ = 0.5 * (stiffness_ + stiffness_.transpose()).eval();
  mass_ = 0.5 * (mass_ + mass_.transpose()).eval();
  mass_llt_.compute(mass_);
  if (mass_llt_.info() != Eigen::Success) throw NumericError("DiscreteProblem: mass matrix not positive definite");
}

Eigen::MatrixXd DiscreteProblem::grid_values(const Eigen::VectorXd& xi) const {
  if (xi.size() != n_) throw ArgumentError("DiscreteProblem: coefficient vector has wrong length");
  const int nt = radial_points();
  Eigen::MatrixXd radial(nt, block_count());
  for (int m = 0; m < block_count(); ++m)
    radial.col(m) = block_radial_table(m) * xi.segment(block_offset(m), block_size(m));
  return radial * fourier_;
}

Eigen::VectorXd DiscreteProblem::project_grid(const Eigen::MatrixXd& g) const {
  const Eigen::MatrixXd h = g * fourier_.transpose();  // n_t x blocks
  Eigen::VectorXd out(n_);
  for (int m = 0; m < block_count(); ++m)
    out.segment(block_offset(m), block_size(m)) = block_radial_table(m).transpose() * h.col(m);
  return out;
}

Eigen::MatrixXd DiscreteProblem::weighted_gram(const Eigen::MatrixXd& g) const {
  const int nt = radial_points(), nb = block_count();
  // s[i](x, y) = sum_p g(i, p) T_x(p) T_y(p)
  std::vector<Eigen::MatrixXd> s(nt);
  for (int i = 0; i < nt; ++i) s[i] = fourier_ * g.row(i).transpose().asDiagonal() * fourier_.transpose();
  Eigen::MatrixXd out(n_, n_);
  Eigen::VectorXd diag(nt);
  for (int a = 0; a < nb; ++a)
    for (int b = a; b < nb; ++b) {
      double mx = 0.0;
      for (int i = 0; i < nt; ++i) {
        diag[i] = s[i](a, b);
        mx = std::max(mx, std::abs(diag[i]));
      }
      auto blk = out.block(block_offset(a), block_offset(b), block_size(a), block_size(b));
      if (mx == 0.0)
        blk.setZero();
      else
        blk.noalias() = block_radial_table(a).transpose() * diag.asDiagonal() * block_radial_table(b);
      if (a != b) out.block(block_offset(b), block_offset(a), block_size(b), block_size(a)) = blk.transpose();
    }
  return out;
}

Eigen::VectorXd DiscreteProblem::residual(const Eigen::VectorXd& xi) const {
  const Eigen::MatrixXd u = grid_values(xi);
  Eigen::MatrixXd g(u.rows(), u.cols());
  const int nth = angular_points();
  for (int i = 0; i < u.rows(); ++i)
    for (int p = 0; p < nth; ++p)
      g(i, p) = weights_(i, p) * problem_.f(points_[static_cast<std::size_t>(i) * nth + p], u(i, p));
  return problem_.stiffness_scale * (stiffness_ * xi) - project_grid(g);
}

Eigen::MatrixXd DiscreteProblem::jacobian(const Eigen::VectorXd& xi) const {
  if (!problem_.f_u) throw CapabilityError("DiscreteProblem::jacobian: problem has no f_u");
  const Eigen::MatrixXd u = grid_values(xi);
  Eigen::MatrixXd g(u.rows(), u.cols());
  const int nth = angular_points();
  for (int i = 0; i < u.rows(); ++i)
    for (int p = 0; p < nth; ++p)
      g(i, p) = weights_(i, p) * problem_.f_u(points_[static_cast<std::size_t>(i) * nth + p], u(i, p));
  return problem_.stiffness_scale * stiffness_ - weighted_gram(g);
}

Eigen::MatrixXd DiscreteProblem::second_order_term(const Eigen::VectorXd& xi, const Eigen::VectorXd& y) const {
  if (!problem_.f_uu) throw CapabilityError("DiscreteProblem::second_order_term: problem has no f_uu");
  const Eigen::MatrixXd u = grid_values(xi);
  const Eigen::MatrixXd yv = grid_values(y);
  Eigen::MatrixXd g(u.rows(), u.cols());
  const int nth = angular_points();
  for (int i = 0; i < u.rows(); ++i)
    for (int p = 0; p < nth; ++p)
      g(i, p) = -weights_(i, p) * yv(i, p) * problem_.f_uu(points_[static_cast<std::size_t>(i) * nth + p], u(i, p));
  return weighted_gram(g);
}

double DiscreteProblem::functional(const Eigen::VectorXd& xi) const {
  const Eigen::MatrixXd u = grid_values(xi);
  const int nth = angular_points();
  double potential = 0.0;
  for (int i = 0; i < u.rows(); ++i)
    for (int p = 0; p < nth; ++p)
      potential += weights_(i, p) * problem_.potential(points_[static_cast<std::size_t>(i) * nth + p], u(i, p));
  return 0.5 * problem_.stiffness_scale * xi.dot(stiffness_ * xi) - potential;
}

double DiscreteProblem::evaluate(const Eigen::VectorXd& xi, double r, double theta) const {
  if (xi.size() != n_) throw ArgumentError("DiscreteProblem: coefficient vector has wrong length");
  if (!(r >= 0.0 && r <= 1.0)) throw ArgumentError("DiscreteProblem::evaluate: r must lie in [0, 1]");
  const double t = 2.0 * r - 1.0;
  std::vector<double> mv(N_), md(N_), av(N_), ad(N_);
  mode_basis_.eval_all(t, mv, md);
  axis_basis_.eval_all(t, av, ad);
  double u = 0.0;
  for (int m = 0; m < block_count(); ++m) {
    const auto& vals = m == 2 * M_ ? av : mv;
    double radial = 0.0;
    for (int j = 0; j < block_size(m); ++j) radial += xi[block_offset(m) + j] * vals[j];
    u += radial * mode_value(m, M_, theta).value;
  }
  return u;
}

std::vector<double> DiscreteProblem::evaluate_field(const Eigen::VectorXd& xi,
                                                    std::span<const PolarPoint> points) const {
  std::vector<double> out;
  out.reserve(points.size());
  for (const auto& pt : points) out.push_back(evaluate(xi, pt.r, pt.theta));
  return out;
}

Point2 DiscreteProblem::gradient(const Eigen::VectorXd& xi, double r, double theta) const {
  if (!(r > 0.0 && r <= 1.0)) throw ArgumentError("DiscreteProblem::gradient: r must lie in (0, 1]");
  const double t = 2.0 * r - 1.0;
  std::vector<double> mv(N_), md(N_), av(N_), ad(N_);
  mode_basis_.eval_all(t, mv, md);
  axis_basis_.eval_all(t, av, ad);
  double ur = 0.0, uth = 0.0;
  for (int m = 0; m < block_count(); ++m) {
    const bool axis = m == 2 * M_;
    double radial = 0.0, radial_t = 0.0;
    for (int j = 0; j < block_size(m); ++j) {
      radial += xi[block_offset(m) + j] * (axis ? av : mv)[j];
      radial_t += xi[block_offset(m) + j] * (axis ? ad : md)[j];
    }
    const auto mvv = mode_value(m, M_, theta);
    ur += 2.0 * radial_t * mvv.value;
    uth += radial * mvv.derivative;
  }
  const double c = std::cos(theta), s = std::sin(theta);
  return {(c * ur - s * uth / r) / domain_.a(), (s * ur + c * uth / r) / domain_.b()};
}

DiscreteProblem DiscreteProblem::with_domain(const EllipseDomain& domain) const {
  return DiscreteProblem(domain, problem_, M_, N_, quad_);
}

DiscreteProblem DiscreteProblem::with_problem(ProblemSpec problem) const {
  return DiscreteProblem(domain_, std::move(problem), M_, N_, quad_);
}

DiscreteProblem DiscreteProblem::with_quadrature(QuadratureSizes quad) const {
  return DiscreteProblem(domain_, problem_, M_, N_, quad);
}

namespace {
void check_dims(const DiscreteProblem& dp, const SpectralCoefficients& xi) {
  if (xi.M() != dp.M() || xi.N() != dp.N())
    throw ArgumentError("coefficient dimensions do not match the discrete problem");
}
}  // namespace

Eigen::VectorXd assemble_residual(const DiscreteProblem& dp, const SpectralCoefficients& xi) {
  check_dims(dp, xi);
  return dp.residual(xi.flat());
}

Eigen::MatrixXd assemble_jacobian(const DiscreteProblem& dp, const SpectralCoefficients& xi) {
  check_dims(dp, xi);
  return dp.jacobian(xi.flat());
}

double functional_value(const DiscreteProblem& dp, const SpectralCoefficients& xi) {
  check_dims(dp, xi);
  return dp.functional(xi.flat());
}

std::vector<double> evaluate_field(const DiscreteProblem& dp, const SpectralCoefficients& xi,
                                   std::span<const PolarPoint> grid) {
  check_dims(dp, xi);
  return dp.evaluate_field(xi.flat(), grid);
}

std::vector<double> linear_eigenvalues(const EllipseDomain& domain, BoundaryCondition bc, int M, int N, int count) {
  if (count < 1) throw ArgumentError("linear_eigenvalues: count must be >= 1");
  const DiscreteProblem dp(domain, linear_reaction(0.0, bc), M, N);
  if (count > dp.size()) throw ArgumentError("linear_eigenvalues: count exceeds the basis size");
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(dp.stiffness(), dp.mass());
  if (solver.info() != Eigen::Success) throw NumericError("linear_eigenvalues: generalized eigensolver failed");
  // Residual report: ||K v - lambda M v|| for the requested pairs.
  std::vector<double> out(count);
  double worst = 0.0;
  for (int k = 0; k < count; ++k) {
    out[k] = solver.eigenvalues()[k];
    const Eigen::VectorXd v = solver.eigenvectors().col(k);
    const double res = (dp.stiffness() * v - out[k] * (dp.mass() * v)).norm() /
                       std::max(1.0, std::abs(out[k]) * (dp.mass() * v).norm());
    worst = std::max(worst, res);
  }
  if (!(worst < 1e-6))
    throw NumericError("linear_eigenvalues: eigenpair residual " + std::to_string(worst) + " too large");
  return out;
}

}  // namespace multisol
