#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace multisol::trust {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class HessianMode { Full, GaussNewton, FiniteDifference };

struct TrustRegionConfig {
  double eps_g = 1e-13;
  double eps_v = 1e-13;
  double delta1 = 0.25;
  double delta2 = 0.75;
  double tau1 = 0.5;
  double tau2 = 2.0;
  int max_iter = 200;
  HessianMode hessian_mode = HessianMode::GaussNewton;
  /// Extra stop when ||F||_inf <= residual_tol; 0 disables it.
  double residual_tol = 0.0;
  /// Give up when Q has not halved over the last stall_window iterations; 0 disables it.
  int stall_window = 0;

  void validate() const;
};

/// Residual F: R^n -> R^m with derivative suppliers.
struct NonlinearSystem {
  std::function<Vector(const Vector&)> residual;
  std::function<Matrix(const Vector&)> jacobian;
  /// sum_i y_i Hess(F_i)(x); only the Full Hessian mode uses it.
  std::function<Matrix(const Vector& x, const Vector& y)> second_order;
};

/// Q(x) = 1/2 ||F(x)||^2.
double objective(const std::function<Vector(const Vector&)>& F, const Vector& x);

enum class StepBranch { Zero, Newton, SteepestDescent, Dogleg };

struct DoglegInfo {
  StepBranch branch = StepBranch::Zero;
  bool regularized = false;  ///< G needed a diagonal shift to factor
  bool singular = false;     ///< no factorization; steepest descent used
  double shift = 0.0;
};

/// Dogleg solution of min g^T s + 1/2 s^T G s over ||s|| <= h.
Vector dogleg_step(const Vector& g, const Matrix& G, double h, DoglegInfo* info = nullptr);

/// q(0) - q(s) = -g^T s - 1/2 s^T G s.
double model_decrease(const Vector& g, const Matrix& G, const Vector& s);

/// r = (Q_old - Q_new) / model_decrease. Throws NumericError when model_decrease <= 0.
double ratio(double Q_old, double Q_new, double model_decrease);

/// g and G of Q at x for the given mode.
struct Derivatives {
  Vector F;
  Vector g;
  Matrix G;
  Matrix J;  ///< empty in FiniteDifference mode
};
Derivatives derivatives(const NonlinearSystem& system, const Vector& x, HessianMode mode);

struct IterationRecord {
  int k;
  double Q;
  double normF_inf;
  double h;
  double r;  ///< NaN on the terminating row
  bool accepted;
  double step_norm;
};

enum class Termination { Converged, ResidualTolerance, MaxIterations, RadiusCollapsed, Stalled };
const char* to_string(Termination t);

struct TrustRegionReport {
  std::vector<IterationRecord> trace;
  Termination termination = Termination::MaxIterations;
  int iterations = 0;
  double final_Q = 0.0;
  double final_normF_inf = 0.0;
  bool full_hessian_unavailable = false;

  bool converged() const {
    return termination == Termination::Converged || termination == Termination::ResidualTolerance;
  }
  /// ||F||_inf at iteration k, or the final value if the run stopped earlier.
  double residual_at(int k) const;
};

struct TrustRegionResult {
  Vector x;
  TrustRegionReport report;
};

/// Trust-region minimization of Q = 1/2 ||F||^2 with dogleg steps.
TrustRegionResult minimize(const NonlinearSystem& system, const Vector& x0, const TrustRegionConfig& cfg = {});

/// CSV columns k,Q,normF_inf,h,r,accepted.
void write_trace_csv(std::ostream& os, const TrustRegionReport& report);

}  // namespace multisol::trust
