#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "multisol/errors.hpp"
#include "multisol/galerkin.hpp"
#include "multisol/rootfind.hpp"
#include "multisol/trustregion.hpp"

namespace multisol::aobd {

using Vector = Eigen::VectorXd;

enum class InnerProductKind { Coefficient, L2 };
const char* to_string(InnerProductKind k);
InnerProductKind parse_inner_product(const std::string& s);

/// (u, v) on flattened coefficient vectors: plain dot product or u^T Mass v.
class InnerProduct {
 public:
  InnerProduct() = default;
  InnerProduct(InnerProductKind kind, const DiscreteProblem& dp);

  InnerProductKind kind() const { return kind_; }
  double operator()(const Vector& u, const Vector& v) const;
  double norm(const Vector& u) const;
  /// P v, where (u, v) = u^T P v.
  Vector apply(const Vector& v) const;

 private:
  InnerProductKind kind_ = InnerProductKind::Coefficient;
  Eigen::MatrixXd mass_;
};

struct AdaptiveBasis {
  std::vector<Vector> members;
  double tolerance = 1e-10;

  int size() const { return static_cast<int>(members.size()); }
  bool empty() const { return members.empty(); }
  /// Columns are the members.
  Eigen::MatrixXd matrix() const;
  /// max |(chi_i, chi_j) - delta_ij|.
  double orthonormality_defect(const InnerProduct& ip) const;
  /// sum_i c_i chi_i.
  Vector combine(const Vector& c) const;
};

struct GramSchmidtResult {
  AdaptiveBasis basis;
  std::vector<int> dropped;  ///< input indices removed as linearly dependent
};

/// Modified Gram-Schmidt with one re-orthogonalization pass. A vector whose norm after
/// projection falls below drop_tol is dropped.
GramSchmidtResult gram_schmidt(const std::vector<Vector>& vectors, const InnerProduct& ip = {},
                               double drop_tol = 1e-8);

struct SolutionRecord {
  SpectralCoefficients xi;
  double residual_inf = 0.0;
  double J = 0.0;
  std::vector<double> amplitudes;  ///< basis-combination path that produced the record
  int iterations = 0;
  bool converged = false;
  std::string origin;  ///< "seed", "enrich", "refine", "continue"
};

/// Records agree if ||xi1 - xi2|| <= tol max(1, ||xi1||). u and -u are different records.
bool same_solution(const SolutionRecord& a, const SolutionRecord& b, double tol = 1e-6);
/// Keeps the lower-residual representative of each class; order of first appearance.
std::vector<SolutionRecord> dedup(const std::vector<SolutionRecord>& records, double tol = 1e-6);

/// f(x, -u) = -f(x, u) at sample values; then -u solves whenever u does.
bool odd_nonlinearity(const ProblemSpec& problem);

struct AobdConfig {
  InnerProductKind inner_product = InnerProductKind::Coefficient;
  std::uint64_t seed = 1;
  double seed_amplitude = 1.0;  ///< Step 1 low-mode guess amplitude
  int seed_modes = 2;           ///< Step 1 guess uses modes i <= seed_modes, j <= seed_modes
  int seed_retries = 8;         ///< redraws; the amplitude doubles after a trivial result
  int enrich_starts = 8;
  int enrich_stall_window = 100;  ///< enrichment solves stop when Q has not halved in this many steps
  int basis_budget = 8;
  int stall_rounds = 2;
  int max_paths = 24;            ///< seed paths kept per refinement level
  double record_tol = 1e-8;      ///< ||F||_inf accepted for a record
  double dedup_tol = 1e-6;
  double trivial_tol = 1e-6;     ///< ||xi|| below this is the trivial solution
  double gram_drop_tol = 1e-8;
  rootfind::GridSearchSpec amplitude_search{};
  trust::TrustRegionConfig solver = default_solver();
  trust::TrustRegionConfig reduced_solver = default_reduced_solver();

  static trust::TrustRegionConfig default_solver();
  static trust::TrustRegionConfig default_reduced_solver();
  void validate() const;
};

/// Trust-region failure carrying the iteration history.
class SolveError : public NumericError {
 public:
  SolveError(const std::string& what, trust::TrustRegionReport report)
      : NumericError(what), report_(std::move(report)) {}
  const trust::TrustRegionReport& report() const { return report_; }

 private:
  trust::TrustRegionReport report_;
};

/// Trust-region solve of F(xi) = 0 at full resolution.
trust::TrustRegionResult polish(const DiscreteProblem& dp, const Vector& xi0, const trust::TrustRegionConfig& cfg);
/// Record for xi with the residual recomputed by a fresh assembly.
SolutionRecord make_record(const DiscreteProblem& dp, const Vector& xi, double record_tol);

/// Low-mode random coefficients (modes i <= modes, degrees j <= modes) with the given amplitude.
Vector low_mode_guess(int M, int N, int modes, double amplitude, std::uint64_t seed);
/// Unit (in ip) eigenvector of the discrete -Lap for the given eigenvalue index (0 = lowest).
Vector linear_mode(const DiscreteProblem& dp, int index, const InnerProduct& ip = {});

struct SeedResult {
  Vector chi0;
  double alpha0 = 0.0;
  Vector solution;
  trust::TrustRegionReport report;
};

/// True when xi represents a constant field (only possible without a Dirichlet condition).
bool is_constant_field(const DiscreteProblem& dp, const Vector& xi, double tol = 1e-6);

/// Solve from xi0, then chi0 = u / ||u||, alpha0 = ||u||. Throws SolveError when the solve
/// fails or lands on the trivial solution or a constant.
SeedResult seed_basis(const DiscreteProblem& dp, const Vector& xi0, const AobdConfig& cfg = {});

/// Roots of omega(alpha) = free^T F(fixed + alpha free), fixed = sum of the given members
/// scaled by their amplitudes. Flagged roots are excluded.
std::vector<double> amplitude_roots(const DiscreteProblem& dp, const std::vector<std::pair<Vector, double>>& fixed,
                                    const Vector& free_direction, const rootfind::GridSearchSpec& spec = {});

struct Enrichment {
  std::vector<double> amplitudes;  ///< one per existing member
  double alpha_new = 0.0;
  Vector chi;
  Vector solution;  ///< sum amplitudes_i chi_i + alpha_new chi
  double residual_inf = 0.0;
  int iterations = 0;
};

struct EnrichOutcome {
  std::vector<Enrichment> found;
  std::vector<trust::TrustRegionReport> failures;
};

/// Solves  F(u)/alpha_new = 0, (chi_i, chi) = 0, (chi, chi) = 1  with u = sum a_i chi_i + alpha_new chi
/// from randomized starts in the orthogonal complement of the basis. `anchors` are amplitude
/// tuples of known solutions used to start the existing amplitudes.
EnrichOutcome enrich_basis(const DiscreteProblem& dp, const AdaptiveBasis& basis,
                           const std::vector<std::vector<double>>& anchors, const AobdConfig& cfg,
                           std::uint64_t stream);

/// Reduced Galerkin system V^T F(V c) in the span of the first `count` basis members.
trust::NonlinearSystem reduced_system(const DiscreteProblem& dp, const Eigen::MatrixXd& V);

struct RefineOutcome {
  std::vector<SolutionRecord> records;
  std::vector<std::vector<double>> paths;  ///< converged amplitude tuples at the final level
  int failures = 0;
};

/// Steps 5-7: extends each path of length `paths[k].size()` to the full basis one member at a
/// time (root-find the newest amplitude, then solve for all amplitudes), polishing every
/// converged combination at full resolution.
RefineOutcome refine(const DiscreteProblem& dp, const AdaptiveBasis& basis, const std::vector<std::vector<double>>& seeds,
                     const AobdConfig& cfg);

struct EnergyCurve {
  int record_id = 0;
  std::vector<double> b;
  std::vector<double> J;
  bool truncated = false;  ///< lost convergence before reaching the target
};

struct ContinuationResult {
  std::vector<SolutionRecord> records;  ///< at the last converged b of each curve
  std::vector<EnergyCurve> curves;
};

/// Walks b from the domain of dp to b_target in `steps` equal steps, re-polishing each record.
ContinuationResult continue_in_geometry(const DiscreteProblem& dp, const std::vector<SolutionRecord>& records,
                                        double b_target, int steps, const AobdConfig& cfg = {});

struct AobdResult {
  AdaptiveBasis basis;
  std::vector<SolutionRecord> records;
  std::vector<double> seed_roots;  ///< Step 2 amplitudes
  SeedResult seed;
  int rounds = 0;
  int failures = 0;
  std::vector<std::string> log;
};

/// Full pipeline: seed, amplitude roots, enrichment rounds with refinement, dedup.
AobdResult solve(const DiscreteProblem& dp, const AobdConfig& cfg = {});

}  // namespace multisol::aobd
