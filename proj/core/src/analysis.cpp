#include "multisol/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "multisol/errors.hpp"
#include "multisol/legendre.hpp"

namespace multisol::analysis {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap(double theta) {
  double t = std::fmod(theta, kTwoPi);
  return t < 0 ? t + kTwoPi : t;
}

// Golden-section minimization on [lo, hi].
template <typename F>
double golden(F&& f, double lo, double hi, int iters = 80) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = f(x1), f2 = f(x2);
  for (int k = 0; k < iters; ++k) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = f(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = f(x2);
    }
  }
  return 0.5 * (lo + hi);
}

// Sample on a grid fine enough for the highest mode, then refine around the best sample.
template <typename F>
double minimize_angle(F&& f, int M) {
  const int samples = std::max(64, 16 * M);
  double best = 0.0, fbest = f(0.0);
  for (int k = 1; k < samples; ++k) {
    const double a = kTwoPi * k / samples;
    const double v = f(a);
    if (v < fbest) {
      fbest = v;
      best = a;
    }
  }
  const double h = kTwoPi / samples;
  const double refined = golden(f, best - h, best + h);
  return f(refined) <= fbest ? wrap(refined) : best;
}
}  // namespace

SpectralCoefficients rotate(const SpectralCoefficients& xi, double angle) {
  SpectralCoefficients out = xi;
  for (int i = 1; i <= xi.M(); ++i) {
    const double c = std::cos(i * angle), s = std::sin(i * angle);
    for (int j = 0; j <= xi.N() - 2; ++j) {
      const double a = xi.alpha(i, j), b = xi.beta(i, j);
      out.alpha(i, j) = a * c + b * s;
      out.beta(i, j) = b * c - a * s;
    }
  }
  return out;
}

SpectralCoefficients reflect(const SpectralCoefficients& xi) {
  SpectralCoefficients out = xi;
  for (int i = 1; i <= xi.M(); ++i)
    for (int j = 0; j <= xi.N() - 2; ++j) out.alpha(i, j) = -xi.alpha(i, j);
  return out;
}

RotationMatch rotation_distance(const SpectralCoefficients& a, const SpectralCoefficients& b) {
  if (a.M() != b.M() || a.N() != b.N()) throw ArgumentError("rotation_distance: dimension mismatch");
  const auto dist = [&](double t) { return (rotate(a, t).flat() - b.flat()).norm(); };
  const double angle = minimize_angle(dist, a.M());
  return {dist(angle), angle};
}

Alignment align_to_axes(const SpectralCoefficients& xi) {
  const auto odd = [&](double t) {
    const auto r = rotate(xi, t);
    double s = 0.0;
    for (int i = 1; i <= xi.M(); ++i)
      for (int j = 0; j <= xi.N() - 2; ++j) s += r.alpha(i, j) * r.alpha(i, j);
    return s;
  };
  const double angle = minimize_angle(odd, xi.M());
  const double scale = std::max(xi.flat().norm(), 1e-300);
  return {rotate(xi, angle), angle, std::sqrt(odd(angle)) / scale};
}

std::vector<std::vector<int>> rotation_classes(const std::vector<aobd::SolutionRecord>& records, double tol) {
  std::vector<std::vector<int>> classes;
  for (int k = 0; k < static_cast<int>(records.size()); ++k) {
    const auto& xi = records[k].xi;
    bool placed = false;
    for (auto& cls : classes) {
      const auto& rep = records[cls.front()].xi;
      if (std::abs(rep.flat().norm() - xi.flat().norm()) > tol * std::max(1.0, rep.flat().norm())) continue;
      if (rotation_distance(rep, xi).distance <= tol * std::max(1.0, rep.flat().norm())) {
        cls.push_back(k);
        placed = true;
        break;
      }
    }
    if (!placed) classes.push_back({k});
  }
  return classes;
}

PolarGrid sample(const DiscreteProblem& dp, const Eigen::VectorXd& xi, int nr, int ntheta) {
  if (nr < 2 || ntheta < 1) throw ArgumentError("sample: need nr >= 2 and ntheta >= 1");
  if (xi.size() != dp.size()) throw ArgumentError("sample: coefficient vector has wrong length");
  const int M = dp.M(), N = dp.N();
  const SpectralCoefficients c(M, N, xi);
  PolarGrid g;
  g.r.resize(nr);
  g.theta.resize(ntheta);
  for (int k = 0; k < nr; ++k) g.r[k] = static_cast<double>(k) / (nr - 1);
  for (int p = 0; p < ntheta; ++p) g.theta[p] = kTwoPi * p / ntheta;

  // Radial profiles per Fourier block, then synthesis in theta.
  Eigen::MatrixXd sinp(nr, M), cosp(nr, M);
  Eigen::VectorXd radial(nr);
  std::vector<double> mv(N), md(N), av(N), ad(N);
  for (int k = 0; k < nr; ++k) {
    const double t = 2.0 * g.r[k] - 1.0;
    dp.mode_basis().eval_all(t, mv, md);
    dp.axis_basis().eval_all(t, av, ad);
    for (int i = 1; i <= M; ++i) {
      double s = 0.0, co = 0.0;
      for (int j = 0; j <= N - 2; ++j) {
        s += c.alpha(i, j) * mv[j];
        co += c.beta(i, j) * mv[j];
      }
      sinp(k, i - 1) = s;
      cosp(k, i - 1) = co;
    }
    double r0 = 0.0;
    for (int l = 0; l < N; ++l) r0 += c.gamma(l) * av[l];
    radial[k] = r0;
  }
  Eigen::MatrixXd S(M, ntheta), C(M, ntheta);
  for (int i = 1; i <= M; ++i)
    for (int p = 0; p < ntheta; ++p) {
      S(i - 1, p) = std::sin(i * g.theta[p]);
      C(i - 1, p) = std::cos(i * g.theta[p]);
    }
  g.u = sinp * S + cosp * C;
  g.u.colwise() += radial;
  return g;
}

std::vector<Peak> find_peaks(const PolarGrid& grid, double rel_height) {
  const int nr = static_cast<int>(grid.r.size());
  const int nt = static_cast<int>(grid.theta.size());
  const Eigen::MatrixXd A = grid.u.cwiseAbs();
  const double top = A.maxCoeff();
  std::vector<Peak> peaks;
  if (!(top > 0.0)) return peaks;
  const double floor = rel_height * top;

  // Centre point: compare with the whole first ring.
  if (A(0, 0) >= floor && A(0, 0) >= A.row(1).maxCoeff()) peaks.push_back({0.0, 0.0, grid.u(0, 0)});
  for (int k = 1; k < nr; ++k)
    for (int p = 0; p < nt; ++p) {
      const double v = A(k, p);
      if (v < floor) continue;
      bool is_max = true;
      for (int dk = -1; dk <= 1 && is_max; ++dk)
        for (int dp = -1; dp <= 1 && is_max; ++dp) {
          if (dk == 0 && dp == 0) continue;
          const int kk = k + dk;
          if (kk >= nr) continue;
          const int pp = (p + dp + nt) % nt;
          const double w = kk == 0 ? A(0, 0) : A(kk, pp);
          // Ties broken toward the lower index so a plateau reports one point.
          if (w > v || (w == v && (kk < k || (kk == k && pp < p)))) is_max = false;
        }
      if (is_max) peaks.push_back({grid.r[k], grid.theta[p], grid.u(k, p)});
    }
  return peaks;
}

double angle_to_curvature_extremum(double theta) {
  const double t = wrap(theta);
  const double q = std::fmod(t, 0.5 * kPi);
  return std::min(q, 0.5 * kPi - q);
}

double half_height_radius(const DiscreteProblem& dp, const Eigen::VectorXd& xi, int nr, int ntheta) {
  // Midpoint rule in r so that the centre is never sampled twice.
  const auto g = sample(dp, xi, nr + 1, ntheta);
  const Eigen::MatrixXd A = g.u.cwiseAbs();
  const double half = 0.5 * A.maxCoeff();
  const double ab = dp.domain().a() * dp.domain().b();
  double area = 0.0;
  const double dr = 1.0 / nr, dth = kTwoPi / ntheta;
  for (int k = 0; k < nr; ++k) {
    const double rm = (k + 0.5) * dr;
    for (int p = 0; p < ntheta; ++p) {
      const double v = 0.5 * (A(k, p) + A(k + 1, p));
      if (v >= half) area += ab * rm * dr * dth;
    }
  }
  return std::sqrt(area / kPi);
}

GradientSplit gradient_split(const DiscreteProblem& dp, const Eigen::VectorXd& xi) {
  const auto rule = legendre::gauss_rule(dp.radial_points());
  const int nth = dp.angular_points();
  const double ab = dp.domain().a() * dp.domain().b();
  GradientSplit out{0.0, 0.0};
  for (int i = 0; i < rule.order(); ++i) {
    const double t = rule.nodes[i];
    const double r = 0.5 * (t + 1.0);
    for (int p = 0; p < nth; ++p) {
      const double th = kTwoPi * p / nth;
      const auto gvec = dp.gradient(xi, r, th);
      const double w = ab * 0.25 * (t + 1.0) * rule.weights[i] * (kTwoPi / nth);
      out.ux2 += w * gvec.x * gvec.x;
      out.uy2 += w * gvec.y * gvec.y;
    }
  }
  return out;
}

std::pair<double, double> field_range(const DiscreteProblem& dp, const Eigen::VectorXd& xi, int nr, int ntheta) {
  const auto g = sample(dp, xi, nr, ntheta);
  return {g.u.minCoeff(), g.u.maxCoeff()};
}

}  // namespace multisol::analysis
