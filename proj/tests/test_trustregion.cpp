#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "multisol/errors.hpp"
#include "multisol/trustregion.hpp"

using namespace multisol;
using namespace multisol::trust;

namespace {

NonlinearSystem rosenbrock() {
  NonlinearSystem s;
  s.residual = [](const Vector& x) {
    Vector f(2);
    f << 1 - x[0], 10 * (x[1] - x[0] * x[0]);
    return f;
  };
  s.jacobian = [](const Vector& x) {
    Matrix J(2, 2);
    J << -1, 0, -20 * x[0], 10;
    return J;
  };
  s.second_order = [](const Vector&, const Vector& y) {
    Matrix H = Matrix::Zero(2, 2);
    H(0, 0) = -20 * y[1];
    return H;
  };
  return s;
}

Vector vec(std::initializer_list<double> v) {
  Vector x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double d : v) x[k++] = d;
  return x;
}

double q(const Vector& g, const Matrix& G, const Vector& s) { return g.dot(s) + 0.5 * s.dot(G * s); }

}  // namespace

TEST(Objective, Values) {
  const auto id = [](const Vector& x) { return x; };
  EXPECT_DOUBLE_EQ(objective(id, vec({3, 4})), 12.5);
  EXPECT_EQ(objective([](const Vector& x) { return Vector::Zero(x.size()).eval(); }, vec({1, 2})), 0.0);
  std::mt19937 rng(1);
  std::normal_distribution<double> nd;
  Vector x(7);
  for (auto& v : x) v = nd(rng);
  const auto F = [](const Vector& y) { return Vector(y.array().sin()); };
  double s = 0;
  for (int i = 0; i < 7; ++i) s += std::sin(x[i]) * std::sin(x[i]);
  EXPECT_NEAR(objective(F, x), 0.5 * s, 1e-15);
}

TEST(Dogleg, NewtonInside) {
  DoglegInfo info;
  const auto s = dogleg_step(vec({1, 0}), Matrix::Identity(2, 2), 10.0, &info);
  EXPECT_NEAR(s[0], -1.0, 1e-15);
  EXPECT_NEAR(s[1], 0.0, 1e-15);
  EXPECT_EQ(info.branch, StepBranch::Newton);
}

TEST(Dogleg, ScaledToBoundary) {
  const auto s = dogleg_step(vec({1, 0}), Matrix::Identity(2, 2), 0.5);
  EXPECT_NEAR(s[0], -0.5, 1e-15);
  EXPECT_NEAR(s[1], 0.0, 1e-15);
}

TEST(Dogleg, InterpolatedBranchAndNearOptimality) {
  const Vector g = vec({1, 1});
  Matrix G = Matrix::Zero(2, 2);
  G(0, 0) = 1;
  G(1, 1) = 4;
  const double cauchy = (g.squaredNorm() / g.dot(G * g)) * g.norm();
  const double newton = G.ldlt().solve(g).norm();
  const double h = 0.5 * (cauchy + newton);
  DoglegInfo info;
  const auto s = dogleg_step(g, G, h, &info);
  EXPECT_EQ(info.branch, StepBranch::Dogleg);
  EXPECT_NEAR(s.norm(), h, 1e-12);

  // Brute force over the ball: the dogleg point should be within a small fraction of the best
  // sampled model value (it is not the exact constrained minimizer).
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(-1, 1);
  double best = 0;
  for (int k = 0; k < 10000;) {
    Vector p = vec({U(rng), U(rng)});
    if (p.norm() > 1) continue;
    best = std::min(best, q(g, G, h * p));
    ++k;
  }
  EXPECT_LE(q(g, G, s), best + 0.03 * std::abs(best));
  // And it always beats the Cauchy point.
  EXPECT_LE(q(g, G, s), q(g, G, -(g.squaredNorm() / g.dot(G * g)) * g) + 1e-15);
}

TEST(Dogleg, ZeroGradientAndSingularHessian) {
  DoglegInfo info;
  EXPECT_EQ(dogleg_step(vec({0, 0}), Matrix::Identity(2, 2), 1.0, &info).norm(), 0.0);
  EXPECT_EQ(info.branch, StepBranch::Zero);
  // Negative definite G: no factorization after the capped shifts, steepest descent to the boundary.
  const auto s = dogleg_step(vec({1, 2}), -Matrix::Identity(2, 2), 0.3, &info);
  EXPECT_TRUE(info.singular);
  EXPECT_NEAR(s.norm(), 0.3, 1e-14);
  EXPECT_LT(s.dot(vec({1, 2})), 0.0);
  EXPECT_THROW(dogleg_step(vec({1, 2}), Matrix::Identity(2, 2), 0.0), ArgumentError);
}

TEST(Ratio, Values) {
  EXPECT_DOUBLE_EQ(ratio(1.0, 0.5, 1.0), 0.5);
  EXPECT_THROW(ratio(1.0, 0.5, 0.0), NumericError);
  EXPECT_THROW(ratio(1.0, 0.5, -1.0), NumericError);
  // Exact quadratic objective: F linear, Gauss-Newton model is exact.
  Matrix A(2, 2);
  A << 2, 1, 0, 3;
  const Vector c = vec({1, -2}), x = vec({0.3, 0.1});
  const Vector F = A * x - c, g = A.transpose() * F;
  const Matrix G = A.transpose() * A;
  const Vector s = dogleg_step(g, G, 0.05);
  const double Qn = 0.5 * (A * (x + s) - c).squaredNorm();
  EXPECT_NEAR(ratio(0.5 * F.squaredNorm(), Qn, model_decrease(g, G, s)), 1.0, 1e-12);
}

TEST(Minimize, LinearResidual) {
  NonlinearSystem s;
  const Vector c = vec({1.5, -2, 0.25});
  s.residual = [c](const Vector& x) { return Vector(x - c); };
  s.jacobian = [](const Vector& x) { return Matrix(Matrix::Identity(x.size(), x.size())); };
  const auto r = minimize(s, Vector::Zero(3));
  EXPECT_TRUE(r.report.converged());
  EXPECT_LE(r.report.iterations, 3);
  EXPECT_LE((r.x - c).norm(), 1e-14);
}

TEST(Minimize, RosenbrockAllModes) {
  for (auto mode : {HessianMode::GaussNewton, HessianMode::Full, HessianMode::FiniteDifference}) {
    TrustRegionConfig cfg;
    cfg.hessian_mode = mode;
    const auto r = minimize(rosenbrock(), vec({-1.2, 1}), cfg);
    EXPECT_TRUE(r.report.converged()) << static_cast<int>(mode);
    EXPECT_NEAR(r.x[0], 1.0, 1e-8);
    EXPECT_NEAR(r.x[1], 1.0, 1e-8);
    if (mode != HessianMode::FiniteDifference) EXPECT_LE(r.report.final_Q, 1e-20);
  }
}

TEST(Minimize, TraceInvariants) {
  const auto r = minimize(rosenbrock(), vec({-1.2, 1}));
  ASSERT_FALSE(r.report.trace.empty());
  const auto d0 = derivatives(rosenbrock(), vec({-1.2, 1}), HessianMode::GaussNewton);
  EXPECT_NEAR(r.report.trace.front().h, d0.g.norm(), 1e-12 * d0.g.norm());
  double Qprev = r.report.trace.front().Q;
  for (std::size_t k = 0; k + 1 < r.report.trace.size(); ++k) {
    const auto& row = r.report.trace[k];
    EXPECT_GT(row.h, 0.0);
    EXPECT_LE(row.step_norm, row.h + 1e-12);
    EXPECT_EQ(row.accepted, row.r >= 0.25);
    const double Qnext = r.report.trace[k + 1].Q;
    if (row.accepted) EXPECT_LE(Qnext, Qprev);
    else EXPECT_EQ(Qnext, Qprev);
    Qprev = Qnext;
  }
  std::ostringstream os;
  write_trace_csv(os, r.report);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "k,Q,normF_inf,h,r,accepted");
}

TEST(Minimize, MaxIterationsIsNotAnException) {
  TrustRegionConfig cfg;
  cfg.max_iter = 2;
  const auto r = minimize(rosenbrock(), vec({-1.2, 1}), cfg);
  EXPECT_EQ(r.report.termination, Termination::MaxIterations);
  EXPECT_FALSE(r.report.converged());
  EXPECT_EQ(r.report.iterations, 2);
}

TEST(Minimize, StallWindowStopsNonzeroResidual) {
  // min Q = 1/2 is not a root; Q creeps toward it without ever halving.
  NonlinearSystem s;
  s.residual = [](const Vector& x) { return vec({x[0] * x[0], 1.0}); };
  s.jacobian = [](const Vector& x) {
    Matrix J(2, 1);
    J << 2 * x[0], 0;
    return J;
  };
  TrustRegionConfig cfg;
  cfg.stall_window = 5;
  const auto r = minimize(s, vec({1.0}), cfg);
  EXPECT_EQ(r.report.termination, Termination::Stalled);
  EXPECT_FALSE(r.report.converged());
  EXPECT_LE(r.report.iterations, 10);
  cfg.stall_window = -1;
  EXPECT_THROW(cfg.validate(), ArgumentError);
}

TEST(Minimize, FullModeWithoutSecondOrderFallsBack) {
  auto s = rosenbrock();
  s.second_order = nullptr;
  TrustRegionConfig cfg;
  cfg.hessian_mode = HessianMode::Full;
  const auto r = minimize(s, vec({-1.2, 1}), cfg);
  EXPECT_TRUE(r.report.full_hessian_unavailable);
  EXPECT_TRUE(r.report.converged());
}

TEST(Derivatives, ModesAgreeOnGradient) {
  const Vector x = vec({0.3, -0.4});
  const auto gn = derivatives(rosenbrock(), x, HessianMode::GaussNewton);
  const auto full = derivatives(rosenbrock(), x, HessianMode::Full);
  const auto fd = derivatives(rosenbrock(), x, HessianMode::FiniteDifference);
  EXPECT_LE((gn.g - full.g).norm(), 1e-15);
  EXPECT_LE((fd.g - gn.g).norm(), 1e-6 * gn.g.norm());
  EXPECT_LE((fd.G - full.G).norm(), 1e-3 * full.G.norm());
}

TEST(TrustConfig, Validation) {
  TrustRegionConfig c;
  EXPECT_EQ(c.eps_g, 1e-13);
  EXPECT_EQ(c.delta1, 0.25);
  EXPECT_EQ(c.delta2, 0.75);
  EXPECT_EQ(c.tau1, 0.5);
  EXPECT_EQ(c.tau2, 2.0);
  EXPECT_EQ(c.hessian_mode, HessianMode::GaussNewton);
  c.delta1 = 0.8;
  EXPECT_THROW(c.validate(), ArgumentError);
  EXPECT_THROW(minimize(rosenbrock(), vec({NAN, 1})), ArgumentError);
}
