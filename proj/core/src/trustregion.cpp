#include "multisol/trustregion.hpp"

#include <cfloat>
#include <cmath>
#include <limits>
#include <ostream>

#include "multisol/errors.hpp"

namespace multisol::trust {

void TrustRegionConfig::validate() const {
  if (!(eps_g > 0.0 && eps_v > 0.0)) throw ArgumentError("TrustRegionConfig: tolerances must be positive");
  if (!(delta1 > 0.0 && delta1 < delta2 && delta2 < 1.0))
    throw ArgumentError("TrustRegionConfig: need 0 < delta1 < delta2 < 1");
  if (!(tau1 > 0.0 && tau1 < 1.0 && tau2 > 1.0)) throw ArgumentError("TrustRegionConfig: need 0 < tau1 < 1 < tau2");
  if (max_iter < 0) throw ArgumentError("TrustRegionConfig: max_iter must be >= 0");
  if (residual_tol < 0.0) throw ArgumentError("TrustRegionConfig: residual_tol must be >= 0");
  if (stall_window < 0) throw ArgumentError("TrustRegionConfig: stall_window must be >= 0");
}

double objective(const std::function<Vector(const Vector&)>& F, const Vector& x) {
  return 0.5 * F(x).squaredNorm();
}

namespace {

// Boundary point of the dogleg path p_c + lambda (p_n - p_c), lambda in [0, 1].
Vector dogleg_interpolate(const Vector& cauchy, const Vector& newton, double h) {
  const Vector d = newton - cauchy;
  const double dd = d.squaredNorm();
  if (dd == 0.0) return cauchy;
  const double cd = cauchy.dot(d);
  const double disc = std::max(0.0, cd * cd - dd * (cauchy.squaredNorm() - h * h));
  const double lambda = (-cd + std::sqrt(disc)) / dd;
  return cauchy + lambda * d;
}

// Shared branch logic given the Newton point (if any) and the curvature g^T G g.
Vector dogleg_from_points(const Vector& g, const std::optional<Vector>& newton, double gGg, double h,
                          DoglegInfo& info) {
  const double gnorm = g.norm();
  if (gnorm == 0.0) {
    info.branch = StepBranch::Zero;
    return Vector::Zero(g.size());
  }
  if (newton && newton->norm() <= h) {
    info.branch = StepBranch::Newton;
    return *newton;
  }
  if (!newton || !(gGg > 0.0)) {
    info.branch = StepBranch::SteepestDescent;
    return -(h / gnorm) * g;
  }
  const Vector cauchy = -(g.squaredNorm() / gGg) * g;
  if (cauchy.norm() > h) {
    info.branch = StepBranch::SteepestDescent;
    return -(h / gnorm) * g;
  }
  info.branch = StepBranch::Dogleg;
  return dogleg_interpolate(cauchy, *newton, h);
}

std::optional<Vector> regularized_newton(const Vector& g, const Matrix& G, DoglegInfo& info) {
  Eigen::LLT<Matrix> llt(G);
  if (llt.info() == Eigen::Success) {
    Vector p = -llt.solve(g);
    if (p.allFinite()) return p;
  }
  const double n = static_cast<double>(G.rows());
  double mu = 1e-10 * std::max(std::abs(G.trace()) / n, DBL_MIN);
  for (int attempt = 0; attempt < 10; ++attempt, mu *= 2.0) {
    llt.compute(G + mu * Matrix::Identity(G.rows(), G.cols()));
    if (llt.info() == Eigen::Success) {
      Vector p = -llt.solve(g);
      if (p.allFinite()) {
        info.regularized = true;
        info.shift = mu;
        return p;
      }
    }
  }
  info.singular = true;
  return std::nullopt;
}

}  // namespace

Vector dogleg_step(const Vector& g, const Matrix& G, double h, DoglegInfo* info) {
  if (!(h > 0.0)) throw ArgumentError("dogleg_step: radius must be positive");
  if (G.rows() != g.size() || G.cols() != g.size()) throw ArgumentError("dogleg_step: dimension mismatch");
  DoglegInfo local;
  DoglegInfo& inf = info ? *info : local;
  inf = DoglegInfo{};
  if (g.norm() == 0.0) return Vector::Zero(g.size());
  const auto newton = regularized_newton(g, G, inf);
  return dogleg_from_points(g, newton, g.dot(G * g), h, inf);
}

double model_decrease(const Vector& g, const Matrix& G, const Vector& s) { return -g.dot(s) - 0.5 * s.dot(G * s); }

double ratio(double Q_old, double Q_new, double model_decrease) {
  if (!(model_decrease > 0.0)) throw NumericError("ratio: non-positive model decrease");
  return (Q_old - Q_new) / model_decrease;
}

Derivatives derivatives(const NonlinearSystem& system, const Vector& x, HessianMode mode) {
  Derivatives d;
  d.F = system.residual(x);
  if (mode == HessianMode::FiniteDifference) {
    const auto Q = [&](const Vector& y) { return 0.5 * system.residual(y).squaredNorm(); };
    const Eigen::Index n = x.size();
    const double scale = std::max(1.0, x.norm());
    const double eg = std::sqrt(DBL_EPSILON) * scale;
    const double eh = std::cbrt(DBL_EPSILON) * scale;
    d.g.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      Vector xp = x, xm = x;
      xp[i] += eg;
      xm[i] -= eg;
      d.g[i] = (Q(xp) - Q(xm)) / (2.0 * eg);
    }
    const double q0 = 0.5 * d.F.squaredNorm();
    Vector qi(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      Vector xi = x;
      xi[i] += eh;
      qi[i] = Q(xi);
    }
    d.G.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i; j < n; ++j) {
        Vector xij = x;
        xij[i] += eh;
        xij[j] += eh;
        const double v = (Q(xij) - qi[i] - qi[j] + q0) / (eh * eh);
        d.G(i, j) = v;
        d.G(j, i) = v;
      }
    return d;
  }
  d.J = system.jacobian(x);
  d.g = d.J.transpose() * d.F;
  d.G = d.J.transpose() * d.J;
  if (mode == HessianMode::Full && system.second_order) d.G += system.second_order(x, d.F);
  return d;
}

const char* to_string(Termination t) {
  switch (t) {
    case Termination::Converged:
      return "converged";
    case Termination::ResidualTolerance:
      return "residual-tolerance";
    case Termination::MaxIterations:
      return "max-iterations";
    case Termination::RadiusCollapsed:
      return "radius-collapsed";
    case Termination::Stalled:
      return "stalled";
  }
  return "unknown";
}

double TrustRegionReport::residual_at(int k) const {
  if (trace.empty()) return final_normF_inf;
  for (const auto& row : trace)
    if (row.k == k) return row.normF_inf;
  return k > trace.back().k ? trace.back().normF_inf : trace.front().normF_inf;
}

namespace {

// Model state at the current iterate. In Gauss-Newton mode G = J^T J is never formed:
// the Newton point is the minimum-norm least-squares solution of J p = -F.
struct Model {
  Vector F;
  Vector g;
  Matrix G;  // Full / FiniteDifference
  Matrix J;  // Gauss-Newton
  std::optional<Vector> newton;
  double gGg = 0.0;
  bool gauss_newton = false;

  // q(0) - q(s). In Gauss-Newton form -v^T (F + v/2) with v = J s avoids the cancellation of
  // -g^T s - |v|^2 / 2 near a solution.
  double decrease(const Vector& s) const {
    if (gauss_newton) {
      const Vector v = J * s;
      return -v.dot(F + 0.5 * v);
    }
    return -g.dot(s) - 0.5 * s.dot(G * s);
  }
};

Model build_model(const NonlinearSystem& system, const Vector& x, HessianMode mode, TrustRegionReport& report) {
  Model m;
  if (mode == HessianMode::GaussNewton ||
      (mode == HessianMode::Full && !system.second_order && (report.full_hessian_unavailable = true))) {
    m.gauss_newton = true;
    m.F = system.residual(x);
    m.J = system.jacobian(x);
    m.g = m.J.transpose() * m.F;
    m.gGg = (m.J * m.g).squaredNorm();
    Vector p;
    if (m.J.rows() == m.J.cols()) {
      Eigen::PartialPivLU<Matrix> lu(m.J);
      if (lu.rcond() > 1e-9) p = -lu.solve(m.F);
    }
    if (p.size() == 0) {
      // Relative rank cutoff: symmetric solutions make J nearly singular along the symmetry orbit,
      // and the tiny singular values would otherwise blow the Newton point up.
      Eigen::CompleteOrthogonalDecomposition<Matrix> cod(m.J.rows(), m.J.cols());
      cod.setThreshold(1e-9);
      cod.compute(m.J);
      p = -cod.solve(m.F);
    }
    if (p.allFinite()) m.newton = std::move(p);
    return m;
  }
  auto d = derivatives(system, x, mode);
  m.F = std::move(d.F);
  m.g = std::move(d.g);
  m.G = std::move(d.G);
  m.gGg = m.g.dot(m.G * m.g);
  DoglegInfo info;
  m.newton = regularized_newton(m.g, m.G, info);
  return m;
}

}  // namespace

TrustRegionResult minimize(const NonlinearSystem& system, const Vector& x0, const TrustRegionConfig& cfg) {
  cfg.validate();
  if (!x0.allFinite()) throw ArgumentError("minimize: initial point is not finite");
  if (!system.residual) throw ArgumentError("minimize: missing residual");
  if (cfg.hessian_mode != HessianMode::FiniteDifference && !system.jacobian)
    throw CapabilityError("minimize: Jacobian supplier required for this Hessian mode");

  TrustRegionResult out;
  auto& report = out.report;
  Vector x = x0;
  Model model = build_model(system, x, cfg.hessian_mode, report);
  double Q = 0.5 * model.F.squaredNorm();
  double h = model.g.norm();

  for (int k = 0;; ++k) {
    const double normF = model.F.size() ? model.F.cwiseAbs().maxCoeff() : 0.0;
    IterationRecord row{k, Q, normF, h, std::numeric_limits<double>::quiet_NaN(), false, 0.0};
    report.iterations = k;
    report.final_Q = Q;
    report.final_normF_inf = normF;

    if (model.g.norm() <= cfg.eps_g && std::abs(Q) <= cfg.eps_v) {
      report.termination = Termination::Converged;
      report.trace.push_back(row);
      break;
    }
    if (cfg.residual_tol > 0.0 && normF <= cfg.residual_tol) {
      report.termination = Termination::ResidualTolerance;
      report.trace.push_back(row);
      break;
    }
    if (k >= cfg.max_iter) {
      report.termination = Termination::MaxIterations;
      report.trace.push_back(row);
      break;
    }
    if (!(h >= 1e-15 * std::max(1.0, x.norm()))) {
      report.termination = Termination::RadiusCollapsed;
      report.trace.push_back(row);
      break;
    }
    if (cfg.stall_window > 0 && k >= cfg.stall_window &&
        Q > 0.5 * report.trace[static_cast<std::size_t>(k - cfg.stall_window)].Q) {
      report.termination = Termination::Stalled;
      report.trace.push_back(row);
      break;
    }

    DoglegInfo info;
    const Vector s = dogleg_from_points(model.g, model.newton, model.gGg, h, info);
    const double pred = model.decrease(s);
    const double snorm = s.norm();

    double r = -std::numeric_limits<double>::infinity();
    Vector x_new, F_new;
    double Q_new = Q;
    if (pred > 0.0) {
      x_new = x + s;
      F_new = system.residual(x_new);
      Q_new = 0.5 * F_new.squaredNorm();
      r = std::isfinite(Q_new) ? ratio(Q, Q_new, pred) : -std::numeric_limits<double>::infinity();
    }
    row.r = r;
    row.step_norm = snorm;
    row.accepted = r >= cfg.delta1;
    report.trace.push_back(row);

    if (r < cfg.delta1)
      h *= cfg.tau1;
    else if (r > cfg.delta2 && snorm >= (1.0 - 1e-10) * h)
      h *= cfg.tau2;

    if (row.accepted) {
      x = std::move(x_new);
      model = build_model(system, x, cfg.hessian_mode, report);
      Q = Q_new;
    }
  }
  out.x = std::move(x);
  return out;
}

void write_trace_csv(std::ostream& os, const TrustRegionReport& report) {
  os << "k,Q,normF_inf,h,r,accepted\n";
  const auto prec = os.precision(17);
  for (const auto& row : report.trace)
    os << row.k << ',' << row.Q << ',' << row.normF_inf << ',' << row.h << ',' << row.r << ','
       << (row.accepted ? 1 : 0) << '\n';
  os.precision(prec);
}

}  // namespace multisol::trust
