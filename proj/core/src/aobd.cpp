#include "multisol/aobd.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

#include <Eigen/Eigenvalues>

namespace multisol::aobd {

const char* to_string(InnerProductKind k) { return k == InnerProductKind::L2 ? "l2-domain" : "coefficient"; }

InnerProductKind parse_inner_product(const std::string& s) {
  if (s == "coefficient") return InnerProductKind::Coefficient;
  if (s == "l2-domain" || s == "L2") return InnerProductKind::L2;
  throw ArgumentError("unknown inner product '" + s + "'");
}

InnerProduct::InnerProduct(InnerProductKind kind, const DiscreteProblem& dp) : kind_(kind) {
  if (kind == InnerProductKind::L2) mass_ = dp.mass();
}

double InnerProduct::operator()(const Vector& u, const Vector& v) const {
  return kind_ == InnerProductKind::L2 ? u.dot(mass_ * v) : u.dot(v);
}

double InnerProduct::norm(const Vector& u) const { return std::sqrt(std::max(0.0, (*this)(u, u))); }

Vector InnerProduct::apply(const Vector& v) const { return kind_ == InnerProductKind::L2 ? Vector(mass_ * v) : v; }

Eigen::MatrixXd AdaptiveBasis::matrix() const {
  if (members.empty()) return {};
  Eigen::MatrixXd V(members.front().size(), size());
  for (int k = 0; k < size(); ++k) V.col(k) = members[k];
  return V;
}

double AdaptiveBasis::orthonormality_defect(const InnerProduct& ip) const {
  double worst = 0.0;
  for (int i = 0; i < size(); ++i)
    for (int j = i; j < size(); ++j)
      worst = std::max(worst, std::abs(ip(members[i], members[j]) - (i == j ? 1.0 : 0.0)));
  return worst;
}

Vector AdaptiveBasis::combine(const Vector& c) const {
  if (c.size() > size()) throw ArgumentError("AdaptiveBasis::combine: too many amplitudes");
  Vector u = Vector::Zero(members.empty() ? 0 : members.front().size());
  for (Eigen::Index k = 0; k < c.size(); ++k) u += c[k] * members[k];
  return u;
}

GramSchmidtResult gram_schmidt(const std::vector<Vector>& vectors, const InnerProduct& ip, double drop_tol) {
  GramSchmidtResult out;
  for (std::size_t k = 0; k < vectors.size(); ++k) {
    if (!vectors[k].allFinite()) throw ArgumentError("gram_schmidt: non-finite vector");
    Vector v = vectors[k];
    const double original = ip.norm(v);
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& q : out.basis.members) v -= ip(q, v) * q;
    const double nv = ip.norm(v);
    if (!(nv >= drop_tol * std::max(1.0, original)) || original == 0.0) {
      out.dropped.push_back(static_cast<int>(k));
      continue;
    }
    out.basis.members.push_back(v / nv);
  }
  return out;
}

bool same_solution(const SolutionRecord& a, const SolutionRecord& b, double tol) {
  if (a.xi.size() != b.xi.size()) return false;
  return (a.xi.flat() - b.xi.flat()).norm() <= tol * std::max(1.0, a.xi.flat().norm());
}

bool odd_nonlinearity(const ProblemSpec& p) {
  for (double u : {0.3, 1.1, 2.7, 5.0}) {
    const Point2 x{0.1, -0.2};
    const double fp = p.f(x, u), fm = p.f(x, -u);
    if (std::abs(fp + fm) > 1e-12 * std::max(1.0, std::abs(fp))) return false;
  }
  return true;
}

std::vector<SolutionRecord> dedup(const std::vector<SolutionRecord>& records, double tol) {
  std::vector<SolutionRecord> out;
  for (const auto& r : records) {
    auto it = std::find_if(out.begin(), out.end(), [&](const SolutionRecord& o) { return same_solution(o, r, tol); });
    if (it == out.end())
      out.push_back(r);
    else if (r.residual_inf < it->residual_inf)
      *it = r;
  }
  return out;
}

trust::TrustRegionConfig AobdConfig::default_solver() {
  trust::TrustRegionConfig c;
  c.max_iter = 200;
  c.residual_tol = 1e-11;
  return c;
}

trust::TrustRegionConfig AobdConfig::default_reduced_solver() {
  trust::TrustRegionConfig c;
  c.max_iter = 100;
  c.residual_tol = 1e-11;
  return c;
}

void AobdConfig::validate() const {
  if (seed_amplitude <= 0.0 || seed_modes < 1 || seed_retries < 0)
    throw ArgumentError("AobdConfig: invalid Step 1 guess settings");
  if (enrich_starts < 1 || basis_budget < 1 || stall_rounds < 1 || max_paths < 1 || enrich_stall_window < 0)
    throw ArgumentError("AobdConfig: counts must be positive");
  if (!(record_tol > 0.0 && dedup_tol > 0.0 && trivial_tol > 0.0 && gram_drop_tol > 0.0))
    throw ArgumentError("AobdConfig: tolerances must be positive");
  solver.validate();
  reduced_solver.validate();
}

trust::TrustRegionResult polish(const DiscreteProblem& dp, const Vector& xi0, const trust::TrustRegionConfig& cfg) {
  trust::NonlinearSystem sys;
  sys.residual = [&dp](const Vector& x) { return dp.residual(x); };
  sys.jacobian = [&dp](const Vector& x) { return dp.jacobian(x); };
  if (dp.problem().f_uu)
    sys.second_order = [&dp](const Vector& x, const Vector& y) { return dp.second_order_term(x, y); };
  return trust::minimize(sys, xi0, cfg);
}

SolutionRecord make_record(const DiscreteProblem& dp, const Vector& xi, double record_tol) {
  SolutionRecord r{SpectralCoefficients(dp.M(), dp.N(), xi), 0.0, 0.0, {}, 0, false, {}};
  const Vector F = dp.residual(xi);
  r.residual_inf = F.cwiseAbs().maxCoeff();
  r.J = dp.functional(xi);
  r.converged = r.residual_inf <= record_tol;
  return r;
}

Vector low_mode_guess(int M, int N, int modes, double amplitude, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  SpectralCoefficients c(M, N);
  const int jmax = std::min(modes, N - 2);
  for (int i = 1; i <= std::min(modes, M); ++i)
    for (int j = 0; j <= jmax; ++j) {
      c.alpha(i, j) = amplitude * U(rng);
      c.beta(i, j) = amplitude * U(rng);
    }
  for (int l = 0; l <= std::min(modes, N - 1); ++l) c.gamma(l) = amplitude * U(rng);
  return c.flat();
}

Vector linear_mode(const DiscreteProblem& dp, int index, const InnerProduct& ip) {
  if (index < 0 || index >= dp.size()) throw ArgumentError("linear_mode: index out of range");
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(dp.stiffness(), dp.mass());
  if (es.info() != Eigen::Success) throw NumericError("linear_mode: eigensolver failed");
  Vector v = es.eigenvectors().col(index);
  // Fix the sign so the largest coefficient is positive.
  Eigen::Index k;
  v.cwiseAbs().maxCoeff(&k);
  if (v[k] < 0) v = -v;
  return v / ip.norm(v);
}

bool is_constant_field(const DiscreteProblem& dp, const Vector& xi, double tol) {
  if (xi.size() != dp.size()) throw ArgumentError("is_constant_field: coefficient vector has wrong length");
  // Only the unconstrained axisymmetric family contains the constant function (its first member).
  Vector rest = xi;
  if (dp.axis_basis().kind() == legendre::RadialKind::Unconstrained)
    rest[SpectralCoefficients::flat_size(dp.M(), dp.N()) - dp.N()] = 0.0;
  return rest.norm() <= tol * std::max(1.0, xi.norm());
}

SeedResult seed_basis(const DiscreteProblem& dp, const Vector& xi0, const AobdConfig& cfg) {
  if (xi0.size() != dp.size()) throw ArgumentError("seed_basis: guess has the wrong length");
  const InnerProduct ip(cfg.inner_product, dp);
  auto res = polish(dp, xi0, cfg.solver);
  const double normF = dp.residual(res.x).cwiseAbs().maxCoeff();
  if (!res.report.converged() && !(normF <= cfg.record_tol))
    throw SolveError("seed_basis: trust-region solve did not converge", res.report);
  const double alpha0 = ip.norm(res.x);
  if (!(alpha0 > cfg.trivial_tol)) throw SolveError("seed_basis: converged to the trivial solution", res.report);
  if (is_constant_field(dp, res.x, cfg.trivial_tol))
    throw SolveError("seed_basis: converged to a constant solution", res.report);
  SeedResult out;
  out.alpha0 = alpha0;
  out.chi0 = res.x / alpha0;
  out.solution = std::move(res.x);
  out.report = std::move(res.report);
  return out;
}

std::vector<double> amplitude_roots(const DiscreteProblem& dp, const std::vector<std::pair<Vector, double>>& fixed,
                                    const Vector& free_direction, const rootfind::GridSearchSpec& spec) {
  if (free_direction.size() != dp.size()) throw ArgumentError("amplitude_roots: direction has the wrong length");
  Vector base = Vector::Zero(dp.size());
  for (const auto& [chi, a] : fixed) base += a * chi;
  const auto w = [&](double a) { return free_direction.dot(dp.residual(base + a * free_direction)); };
  return rootfind::find_all_roots(w, spec).values(false);
}

namespace {

// Square system for one enrichment: unknowns z = (chi, a_0..a_{m-1}, alpha).
trust::NonlinearSystem enrichment_system(const DiscreteProblem& dp, const AdaptiveBasis& basis, const InnerProduct& ip) {
  const int n = dp.size();
  const int m = basis.size();
  auto V = std::make_shared<Eigen::MatrixXd>(basis.matrix());
  auto PV = std::make_shared<Eigen::MatrixXd>(n, m);
  for (int i = 0; i < m; ++i) PV->col(i) = ip.apply(basis.members[i]);
  trust::NonlinearSystem sys;
  sys.residual = [&dp, &ip, V, PV, n, m](const Vector& z) {
    const Vector chi = z.head(n);
    const Vector a = z.segment(n, m);
    const double alpha = z[n + m];
    Vector out(n + m + 1);
    out.head(n) = dp.residual(*V * a + alpha * chi) / alpha;
    out.segment(n, m) = PV->transpose() * chi;
    out[n + m] = ip(chi, chi) - 1.0;
    return out;
  };
  sys.jacobian = [&dp, &ip, V, PV, n, m](const Vector& z) {
    const Vector chi = z.head(n);
    const Vector a = z.segment(n, m);
    const double alpha = z[n + m];
    const Vector u = *V * a + alpha * chi;
    const Eigen::MatrixXd J = dp.jacobian(u);
    const Vector F = dp.residual(u);
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n + m + 1, n + m + 1);
    out.topLeftCorner(n, n) = J;
    out.block(0, n, n, m) = J * *V / alpha;
    out.block(0, n + m, n, 1) = J * chi / alpha - F / (alpha * alpha);
    out.block(n, 0, m, n) = PV->transpose();
    out.block(n + m, 0, 1, n) = 2.0 * ip.apply(chi).transpose();
    return out;
  };
  return sys;
}

std::uint64_t mix(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

bool same_amplitudes(const std::vector<double>& a, const std::vector<double>& b, double tol) {
  if (a.size() != b.size()) return false;
  double d = 0.0, na = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    d += (a[k] - b[k]) * (a[k] - b[k]);
    na += a[k] * a[k];
  }
  return std::sqrt(d) <= tol * std::max(1.0, std::sqrt(na));
}

}  // namespace

EnrichOutcome enrich_basis(const DiscreteProblem& dp, const AdaptiveBasis& basis,
                           const std::vector<std::vector<double>>& anchors, const AobdConfig& cfg,
                           std::uint64_t stream) {
  if (basis.empty()) throw ArgumentError("enrich_basis: basis is empty");
  const int n = dp.size();
  const int m = basis.size();
  if (m >= n) return {};
  const InnerProduct ip(cfg.inner_product, dp);
  const auto sys = enrichment_system(dp, basis, ip);
  trust::TrustRegionConfig tr = cfg.solver;
  tr.residual_tol = std::min(tr.residual_tol > 0.0 ? tr.residual_tol : 1e-11, 1e-11);
  tr.stall_window = cfg.enrich_stall_window;

  EnrichOutcome out;
  for (int s = 0; s < cfg.enrich_starts; ++s) {
    const std::uint64_t seed = mix(cfg.seed, 0x9e3779b97f4a7c15ULL ^ stream, static_cast<std::uint64_t>(s));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);

    Vector chi = low_mode_guess(dp.M(), dp.N(), 2 + s % 3, 1.0, seed);
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& q : basis.members) chi -= ip(q, chi) * q;
    const double nc = ip.norm(chi);
    if (!(nc > 0.0)) continue;
    chi /= nc;

    Vector a = Vector::Zero(m);
    if (!anchors.empty()) {
      const auto& anchor = anchors[static_cast<std::size_t>(s) % anchors.size()];
      for (int k = 0; k < m && k < static_cast<int>(anchor.size()); ++k) a[k] = anchor[k];
    }
    // Start the new amplitude on a root of the scalar equation along chi when there is one,
    // otherwise at a random scale.
    std::vector<std::pair<Vector, double>> fixed;
    for (int k = 0; k < m; ++k) fixed.emplace_back(basis.members[k], a[k]);
    std::vector<double> roots;
    for (double r : amplitude_roots(dp, fixed, chi, cfg.amplitude_search))
      if (std::abs(r) >= cfg.dedup_tol) roots.push_back(r);
    double alpha;
    if (!roots.empty()) {
      alpha = roots[static_cast<std::size_t>(s / 2) % roots.size()];
    } else {
      const double sign = (s % 2 == 0) ? 1.0 : -1.0;
      alpha = sign * std::exp(std::log(8.0) * U(rng)) * std::max(1.0, a.cwiseAbs().maxCoeff());
    }

    Vector z(n + m + 1);
    z << chi, a, alpha;
    auto res = trust::minimize(sys, z, tr);
    const Vector& zf = res.x;
    const double alpha_new = zf[n + m];
    if (!res.report.converged() || !(std::abs(alpha_new) >= cfg.dedup_tol)) {
      out.failures.push_back(std::move(res.report));
      continue;
    }
    Enrichment e;
    e.chi = zf.head(n);
    e.alpha_new = alpha_new;
    e.amplitudes.assign(zf.data() + n, zf.data() + n + m);
    e.solution = basis.combine(zf.segment(n, m)) + alpha_new * e.chi;
    e.residual_inf = dp.residual(e.solution).cwiseAbs().maxCoeff();
    e.iterations = res.report.iterations;
    if (!(e.residual_inf <= cfg.record_tol)) {
      out.failures.push_back(std::move(res.report));
      continue;
    }
    // chi and -chi (with alpha flipped) describe the same enrichment.
    const bool duplicate = std::any_of(out.found.begin(), out.found.end(), [&](const Enrichment& o) {
      const double tol = cfg.dedup_tol;
      return (o.chi - e.chi).norm() <= tol || (o.chi + e.chi).norm() <= tol;
    });
    if (!duplicate) out.found.push_back(std::move(e));
  }
  return out;
}

trust::NonlinearSystem reduced_system(const DiscreteProblem& dp, const Eigen::MatrixXd& V) {
  auto Vp = std::make_shared<Eigen::MatrixXd>(V);
  trust::NonlinearSystem sys;
  sys.residual = [&dp, Vp](const Vector& c) { return Vector(Vp->transpose() * dp.residual(*Vp * c)); };
  sys.jacobian = [&dp, Vp](const Vector& c) {
    return Eigen::MatrixXd(Vp->transpose() * dp.jacobian(*Vp * c) * *Vp);
  };
  return sys;
}

RefineOutcome refine(const DiscreteProblem& dp, const AdaptiveBasis& basis, const std::vector<std::vector<double>>& seeds,
                     const AobdConfig& cfg) {
  RefineOutcome out;
  const int K = basis.size();
  if (K == 0) return out;

  const auto polish_path = [&](const std::vector<double>& c) {
    const Vector x0 = basis.combine(Eigen::Map<const Vector>(c.data(), static_cast<Eigen::Index>(c.size())));
    auto res = polish(dp, x0, cfg.solver);
    auto rec = make_record(dp, res.x, cfg.record_tol);
    rec.amplitudes = c;
    rec.iterations = res.report.iterations;
    rec.origin = "refine";
    if (rec.converged)
      out.records.push_back(std::move(rec));
    else
      ++out.failures;
  };

  std::vector<std::vector<double>> current;
  for (const auto& s : seeds) {
    if (s.empty() || static_cast<int>(s.size()) > K) throw ArgumentError("refine: seed path length out of range");
    current.push_back(s);
  }
  if (current.empty()) return out;

  // Group by level: bring shorter seeds up to the longest seed length by zero padding.
  std::size_t level = 0;
  for (const auto& p : current) level = std::max(level, p.size());
  for (auto& p : current) p.resize(level, 0.0);

  const auto Vfull = basis.matrix();
  while (static_cast<int>(level) < K) {
    const Vector chi_new = basis.members[level];
    const Eigen::MatrixXd V = Vfull.leftCols(static_cast<Eigen::Index>(level + 1));
    const auto sys = reduced_system(dp, V);
    std::vector<std::vector<double>> next;
    const auto add_next = [&](std::vector<double> c) {
      const bool dup = std::any_of(next.begin(), next.end(),
                                   [&](const std::vector<double>& o) { return same_amplitudes(o, c, cfg.dedup_tol); });
      if (!dup) next.push_back(std::move(c));
    };
    for (const auto& p : current) {
      std::vector<std::pair<Vector, double>> fixed;
      for (std::size_t k = 0; k < level; ++k) fixed.emplace_back(basis.members[k], p[k]);
      std::vector<double> roots;
      try {
        roots = amplitude_roots(dp, fixed, chi_new, cfg.amplitude_search);
      } catch (const std::exception&) {
        ++out.failures;
      }
      for (double r : roots) {
        Vector c0(static_cast<Eigen::Index>(level + 1));
        for (std::size_t k = 0; k < level; ++k) c0[static_cast<Eigen::Index>(k)] = p[k];
        c0[static_cast<Eigen::Index>(level)] = r;
        auto res = trust::minimize(sys, c0, cfg.reduced_solver);
        const double rn = res.report.final_normF_inf;
        if (!res.x.allFinite() || !(res.report.converged() || rn <= cfg.record_tol)) {
          ++out.failures;
          continue;
        }
        add_next(std::vector<double>(res.x.data(), res.x.data() + res.x.size()));
      }
    }
    // Paths whose newest amplitude stays at zero carry over unchanged.
    for (const auto& p : current) {
      auto q = p;
      q.push_back(0.0);
      if (static_cast<int>(next.size()) < cfg.max_paths) add_next(std::move(q));
    }
    if (static_cast<int>(next.size()) > cfg.max_paths) next.resize(static_cast<std::size_t>(cfg.max_paths));
    current = std::move(next);
    ++level;
    for (const auto& c : current)
      if (c.back() != 0.0) polish_path(c);
  }
  out.paths = std::move(current);
  out.records = dedup(out.records, cfg.dedup_tol);
  return out;
}

ContinuationResult continue_in_geometry(const DiscreteProblem& dp, const std::vector<SolutionRecord>& records,
                                        double b_target, int steps, const AobdConfig& cfg) {
  const double b1 = dp.domain().b();
  const double a = dp.domain().a();
  if (!(b_target > 0.0 && b_target <= b1)) throw ArgumentError("continue_in_geometry: need 0 < b_target <= b");
  if (steps < 0) throw ArgumentError("continue_in_geometry: steps must be >= 0");
  if (b_target == b1) steps = 0;
  else if (steps == 0) throw ArgumentError("continue_in_geometry: steps must be positive when b changes");

  std::vector<DiscreteProblem> path;
  std::vector<double> bs;
  for (int k = 1; k <= steps; ++k) {
    const double b = k == steps ? b_target : b1 + (b_target - b1) * k / steps;
    bs.push_back(b);
    path.push_back(dp.with_domain(EllipseDomain(a, b)));
  }

  ContinuationResult out;
  for (std::size_t id = 0; id < records.size(); ++id) {
    const auto& rec = records[id];
    EnergyCurve curve;
    curve.record_id = static_cast<int>(id);
    curve.b.push_back(b1);
    curve.J.push_back(dp.functional(rec.xi.flat()));
    SolutionRecord last = rec;
    for (std::size_t k = 0; k < path.size(); ++k) {
      auto res = polish(path[k], last.xi.flat(), cfg.solver);
      auto next = make_record(path[k], res.x, cfg.record_tol);
      if (!next.converged) {
        curve.truncated = true;
        break;
      }
      next.amplitudes = rec.amplitudes;
      next.iterations = res.report.iterations;
      next.origin = "continue";
      last = std::move(next);
      curve.b.push_back(bs[k]);
      curve.J.push_back(last.J);
    }
    out.records.push_back(std::move(last));
    out.curves.push_back(std::move(curve));
  }
  return out;
}

AobdResult solve(const DiscreteProblem& dp, const AobdConfig& cfg) {
  cfg.validate();
  const InnerProduct ip(cfg.inner_product, dp);
  AobdResult out;
  std::vector<SolutionRecord> found;

  // Step 1. A trivial or constant result enlarges the guess; a failed solve redraws it.
  bool seeded = false;
  double amplitude = cfg.seed_amplitude;
  for (int attempt = 0; attempt <= cfg.seed_retries && !seeded; ++attempt) {
    const Vector guess = low_mode_guess(dp.M(), dp.N(), cfg.seed_modes, amplitude, mix(cfg.seed, 1, attempt));
    try {
      out.seed = seed_basis(dp, guess, cfg);
      seeded = true;
    } catch (const SolveError& e) {
      out.log.push_back(std::string("step1 attempt ") + std::to_string(attempt) + ": " + e.what());
      ++out.failures;
      if (e.report().converged()) amplitude *= 2.0;
    }
  }
  if (!seeded) return out;
  {
    auto rec = make_record(dp, out.seed.solution, cfg.record_tol);
    rec.amplitudes = {out.seed.alpha0};
    rec.iterations = out.seed.report.iterations;
    rec.origin = "seed";
    found.push_back(std::move(rec));
  }
  out.basis.members.push_back(out.seed.chi0);

  // Step 2.
  out.seed_roots = amplitude_roots(dp, {}, out.seed.chi0, cfg.amplitude_search);
  std::vector<std::vector<double>> paths;
  for (double r : out.seed_roots) {
    paths.push_back({r});
    auto res = polish(dp, r * out.seed.chi0, cfg.solver);
    auto rec = make_record(dp, res.x, cfg.record_tol);
    rec.amplitudes = {r};
    rec.iterations = res.report.iterations;
    rec.origin = "seed";
    if (rec.converged)
      found.push_back(std::move(rec));
    else
      ++out.failures;
  }
  out.log.push_back("step2: " + std::to_string(out.seed_roots.size()) + " amplitude roots");
  if (paths.empty()) paths.push_back({out.seed.alpha0});

  // Steps 3-7, repeated until the basis budget is used or enrichment stalls.
  int stall = 0;
  while (out.basis.size() < cfg.basis_budget && stall < cfg.stall_rounds) {
    const std::size_t before = dedup(found, cfg.dedup_tol).size();
    auto enriched = enrich_basis(dp, out.basis, paths, cfg, static_cast<std::uint64_t>(out.rounds));
    out.failures += static_cast<int>(enriched.failures.size());
    std::vector<Vector> candidates = out.basis.members;
    for (auto& e : enriched.found) {
      auto rec = make_record(dp, e.solution, cfg.record_tol);
      rec.amplitudes = e.amplitudes;
      rec.amplitudes.push_back(e.alpha_new);
      rec.iterations = e.iterations;
      rec.origin = "enrich";
      if (rec.converged) found.push_back(std::move(rec));
      candidates.push_back(e.chi);
    }
    auto gs = gram_schmidt(candidates, ip, cfg.gram_drop_tol);
    if (gs.basis.size() > cfg.basis_budget) gs.basis.members.resize(static_cast<std::size_t>(cfg.basis_budget));
    const int grown = gs.basis.size() - out.basis.size();
    ++out.rounds;
    if (grown > 0) {
      out.basis = std::move(gs.basis);
      auto refined = refine(dp, out.basis, paths, cfg);
      out.failures += refined.failures;
      for (auto& r : refined.records) found.push_back(std::move(r));
      if (!refined.paths.empty()) {
        paths = std::move(refined.paths);
      } else {
        for (auto& p : paths) p.resize(static_cast<std::size_t>(out.basis.size()), 0.0);
      }
    }
    const std::size_t after = dedup(found, cfg.dedup_tol).size();
    out.log.push_back("round " + std::to_string(out.rounds) + ": basis " + std::to_string(out.basis.size()) +
                      ", records " + std::to_string(after));
    stall = after > before ? 0 : stall + 1;
  }

  std::vector<SolutionRecord> kept;
  for (auto& r : found)
    if (r.converged && r.xi.flat().norm() > cfg.trivial_tol) kept.push_back(std::move(r));
  kept = dedup(kept, cfg.dedup_tol);
  // Odd nonlinearities map u to -u exactly; close the set under that symmetry.
  if (odd_nonlinearity(dp.problem())) {
    const std::size_t count = kept.size();
    for (std::size_t k = 0; k < count; ++k) {
      auto neg = make_record(dp, -kept[k].xi.flat(), cfg.record_tol);
      neg.amplitudes = kept[k].amplitudes;
      for (auto& a : neg.amplitudes) a = -a;
      neg.origin = "negation";
      if (neg.converged) kept.push_back(std::move(neg));
    }
  }
  out.records = dedup(kept, cfg.dedup_tol);
  return out;
}

}  // namespace multisol::aobd
