#pragma once

#include <functional>
#include <vector>

namespace multisol::rootfind {

using ScalarFunction = std::function<double(double)>;

/// Relative floating-point spacing used by the bracketing iteration: DBL_EPSILON * max(|b|, 1).
double eps(double b);

/// Secant point from (a, w(a)) and (b, w(b)); +infinity when a != b and w(a) == w(b) != 0,
/// b when a == b.
double secant_or_flag(double b, double a, double wb, double wa);
double secant_or_flag(double b, double a, const ScalarFunction& w);

/// Accepts `candidate` if it lies between the machine step b + sign(c-b) eps(b) and the
/// midpoint (b+c)/2; returns the machine step if candidate is within eps(b) of b; otherwise
/// the midpoint.
double guarded_step(double candidate, double b, double c);

/// psi(x, x*) = 1/|x - x*|^2 + 1.
double deflation_factor(double x, double root);

/// Bracketing state: b is the best iterate, c the counterpoint, a the previous b.
struct BracketState {
  double b;
  double a;
  double c;
  double wb;
  double wc;
  int k;
};

struct BracketResult {
  double root = 0.0;
  double value = 0.0;  ///< function value at the root (of the function iterated on)
  int iterations = 0;
  bool converged = false;
  std::vector<BracketState> trace;
};

/// Dekker-type secant/bisection iteration from a sign-changing pair.
BracketResult bracket_solve(const ScalarFunction& w, double x0, double x1, int max_iter = 1000,
                            bool keep_trace = false);

/// w(x) * prod_k psi(x, x*_k), evaluated in log-magnitude near a known root.
class DeflatedFunction {
 public:
  explicit DeflatedFunction(ScalarFunction w) : w_(std::move(w)) {}

  void deflate(double root) { roots_.push_back(root); }
  const std::vector<double>& roots() const { return roots_; }

  double operator()(double x) const;
  /// Deflated value given an already computed w(x).
  double apply(double x, double wx) const;

 private:
  ScalarFunction w_;
  std::vector<double> roots_;
};

/// Search region for new sign changes.
struct GridSearchSpec {
  double lo = -50.0;
  double hi = 50.0;
  int points = 400;
  double residual_tol = 1e-8;  ///< roots with |w(x*)| above this are flagged
  int max_iter = 1000;         ///< per bracketing solve
  int max_roots = 256;
};

struct Root {
  double x;
  double residual;  ///< |w(x)| of the undeflated function
  bool flagged;
  int iterations;
};

struct RootSet {
  std::vector<Root> roots;  ///< ascending in x

  std::size_t size() const { return roots.size(); }
  std::vector<double> values(bool include_flagged = false) const;
};

/// Two roots are the same if |x1 - x2| <= 1e-8 max(1, |x1|).
bool same_root(double x1, double x2);

/// Repeated grid search, bracketing solve, and deflation until no sign change remains.
RootSet find_all_roots(const ScalarFunction& w, const GridSearchSpec& spec = {});

}  // namespace multisol::rootfind
