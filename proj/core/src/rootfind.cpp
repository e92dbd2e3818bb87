#include "multisol/rootfind.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>

#include "multisol/errors.hpp"

namespace multisol::rootfind {

double eps(double b) { return DBL_EPSILON * std::max(std::abs(b), 1.0); }

double secant_or_flag(double b, double a, double wb, double wa) {
  if (a != b && wb != wa) return b - (b - a) / (wb - wa) * wb;
  if (a != b && wb == wa && wb != 0.0) return std::numeric_limits<double>::infinity();
  return b;
}

double secant_or_flag(double b, double a, const ScalarFunction& w) { return secant_or_flag(b, a, w(b), w(a)); }

double guarded_step(double candidate, double b, double c) {
  const double step = b + (c > b ? 1.0 : -1.0) * eps(b);
  const double mid = 0.5 * (b + c);
  const double lo = std::min(step, mid), hi = std::max(step, mid);
  if (std::isfinite(candidate) && candidate >= lo && candidate <= hi) return candidate;
  if (std::isfinite(candidate) && std::abs(candidate - b) <= eps(b)) return step;
  return mid;
}

double deflation_factor(double x, double root) {
  const double d = x - root;
  return 1.0 / (d * d) + 1.0;
}

double DeflatedFunction::operator()(double x) const { return apply(x, w_(x)); }

double DeflatedFunction::apply(double x, double wx) const {
  if (wx == 0.0 || roots_.empty()) return wx;
  bool near = false;
  for (double r : roots_) near = near || std::abs(x - r) < 1e-12;
  if (!near) {
    double v = wx;
    for (double r : roots_) v *= deflation_factor(x, r);
    return std::isfinite(v) ? v : std::copysign(DBL_MAX, v);
  }
  double log_mag = std::log(std::abs(wx));
  for (double r : roots_) {
    const double d = std::abs(x - r);
    if (d == 0.0) return std::copysign(DBL_MAX, wx);
    log_mag += std::log1p(d * d) - 2.0 * std::log(d);
  }
  if (log_mag > std::log(DBL_MAX)) return std::copysign(DBL_MAX, wx);
  return std::copysign(std::exp(log_mag), wx);
}

BracketResult bracket_solve(const ScalarFunction& w, double x0, double x1, int max_iter, bool keep_trace) {
  double w0 = w(x0), w1 = w(x1);
  if (w0 * w1 > 0.0) throw ArgumentError("bracket_solve: endpoints do not bracket a sign change");
  double b, a, c, wb, wa, wc;
  if (std::abs(w1) <= std::abs(w0)) {
    b = x1, wb = w1;
    a = c = x0, wa = wc = w0;
  } else {
    b = x0, wb = w0;
    a = c = x1, wa = wc = w1;
  }
  BracketResult out;
  int k = 1;
  if (keep_trace) out.trace.push_back({b, a, c, wb, wc, k});
  while (true) {
    if (wb == 0.0 || std::abs(b - c) <= 2.0 * eps(b)) {
      out.converged = true;
      break;
    }
    if (k >= max_iter) break;
    ++k;
    const double lambda = secant_or_flag(b, a, wb, wa);
    const double x = guarded_step(lambda, b, c);
    const double wx = w(x);
    // Most recent iterate with opposite sign: b if the new value changes sign against it, else c.
    double xj, wj;
    if (wx * wb <= 0.0) {
      xj = b, wj = wb;
    } else {
      xj = c, wj = wc;
    }
    if (std::abs(wx) <= std::abs(wj)) {
      a = b, wa = wb;
      b = x, wb = wx;
      c = xj, wc = wj;
    } else {
      b = xj, wb = wj;
      a = c = x;
      wa = wc = wx;
    }
    if (keep_trace) out.trace.push_back({b, a, c, wb, wc, k});
  }
  out.root = b;
  out.value = wb;
  out.iterations = k;
  return out;
}

std::vector<double> RootSet::values(bool include_flagged) const {
  std::vector<double> v;
  for (const auto& r : roots)
    if (include_flagged || !r.flagged) v.push_back(r.x);
  return v;
}

bool same_root(double x1, double x2) { return std::abs(x1 - x2) <= 1e-8 * std::max(1.0, std::abs(x1)); }

namespace {

struct Sample {
  double x;
  double w;  // undeflated
};

}  // namespace

RootSet find_all_roots(const ScalarFunction& w, const GridSearchSpec& spec) {
  if (!(spec.hi > spec.lo) || spec.points < 2) throw ArgumentError("find_all_roots: invalid grid search spec");
  DeflatedFunction deflated(w);
  RootSet set;

  std::vector<Sample> samples;
  samples.reserve(spec.points);
  for (int i = 0; i < spec.points; ++i) {
    const double x = spec.lo + (spec.hi - spec.lo) * i / (spec.points - 1);
    samples.push_back({x, w(x)});
  }
  std::vector<std::pair<double, double>> exhausted;

  auto is_known = [&](double x) {
    return std::any_of(set.roots.begin(), set.roots.end(), [&](const Root& r) { return same_root(r.x, x); });
  };
  auto contains_known = [&](double lo, double hi) {
    return std::any_of(set.roots.begin(), set.roots.end(), [&](const Root& r) { return r.x > lo && r.x < hi; });
  };
  auto add_root = [&](double x, int iterations) {
    const double res = std::abs(w(x));
    set.roots.push_back({x, res, !(res <= spec.residual_tol), iterations});
    deflated.deflate(x);
    // Split the search region at the new root; the interval across it is never searched.
    const double eta = 1e-7 * std::max(1.0, std::abs(x));
    for (double y : {x - eta, x + eta})
      if (y > spec.lo && y < spec.hi) samples.push_back({y, w(y)});
    std::sort(samples.begin(), samples.end(), [](const Sample& p, const Sample& q) { return p.x < q.x; });
  };

  while (static_cast<int>(set.roots.size()) < spec.max_roots) {
    // Step 2: grid search on the deflated function.
    bool found = false;
    for (std::size_t i = 0; i + 1 < samples.size() && !found; ++i) {
      const auto& p = samples[i];
      const auto& q = samples[i + 1];
      if (contains_known(p.x, q.x)) continue;
      if (std::find(exhausted.begin(), exhausted.end(), std::make_pair(p.x, q.x)) != exhausted.end()) continue;
      const double wp = deflated.apply(p.x, p.w), wq = deflated.apply(q.x, q.w);
      if (wp == 0.0 && !is_known(p.x)) {
        add_root(p.x, 0);
        found = true;
        break;
      }
      if (wp * wq > 0.0 || wq == 0.0) continue;
      // Step 3: bracketing iteration on the deflated function.
      const auto res = bracket_solve(deflated, p.x, q.x, spec.max_iter);
      if (is_known(res.root)) {
        exhausted.emplace_back(p.x, q.x);
        continue;
      }
      add_root(res.root, res.iterations);
      if (!res.converged) set.roots.back().flagged = true;
      found = true;
    }
    if (!found) break;
  }
  if (!samples.empty()) {
    const auto& last = samples.back();
    if (last.w == 0.0 && !is_known(last.x)) add_root(last.x, 0);
  }
  std::sort(set.roots.begin(), set.roots.end(), [](const Root& p, const Root& q) { return p.x < q.x; });
  return set;
}

}  // namespace multisol::rootfind
