#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "multisol/aobd.hpp"
#include "multisol/galerkin.hpp"
#include "multisol/problems.hpp"

namespace multisol::io {

struct SweepSpec {
  double b_end = 1.0;
  int steps = 0;
  bool enabled() const { return steps > 0; }
};

/// Everything a run needs. Text form (INI-like):
///
///   [problem]        name, parameter, bc
///   [domain]         a, b
///   [discretization] M, N, radial_points, angular_points
///   [solver]         eps_g, eps_v, max_iter, residual_tol, record_tol
///   [basis]          budget, enrich_starts, max_paths, inner_product
///   [sweep]          b_end, steps
///   [run]            seed, output
///
/// Keys may also be written as section.key outside any section.
struct RunConfig {
  std::string problem = "sine-gordon";
  double parameter = 30.0;
  BoundaryCondition bc = BoundaryCondition::Dirichlet;
  double a = 1.0;
  double b = 1.0;
  int M = 12;
  int N = 12;
  int radial_points = 0;
  int angular_points = 0;
  double eps_g = 1e-13;
  double eps_v = 1e-13;
  int max_iter = 200;
  double residual_tol = 1e-11;
  double record_tol = 1e-8;
  int basis_budget = 8;
  int enrich_starts = 8;
  int max_paths = 24;
  aobd::InnerProductKind inner_product = aobd::InnerProductKind::Coefficient;
  SweepSpec sweep;
  std::uint64_t seed = 1;
  bool seed_given = false;
  std::string output = "multisol-out";

  /// Throws ConfigError naming the offending field.
  void validate() const;
  /// Sets one field from its text form; throws ConfigError(key) on unknown keys or bad values.
  void set(const std::string& key, const std::string& value);

  ProblemSpec problem_spec() const;
  DiscreteProblem discrete_problem() const;
  aobd::AobdConfig aobd_config() const;
};

/// Parses the text form. Errors carry "source:line".
RunConfig parse_config(std::istream& in, const std::string& source = "<config>");
RunConfig load_config(const std::filesystem::path& file);
/// Canonical text form (every field, fixed order); parse_config(echo(c)) == c.
std::string echo(const RunConfig& c);
/// FNV-1a 64 of the canonical text (output directory excluded), as 16 hex digits.
std::string config_hash(const RunConfig& c);

/// Shortest round-trip-exact text for a double (17 significant digits).
std::string format_double(double v);

struct ResultBundle {
  RunConfig config;
  std::vector<aobd::SolutionRecord> records;
  std::vector<double> seed_roots;
  trust::TrustRegionReport seed_trace;
  std::vector<std::string> log;
  /// Present when the run included a b sweep.
  std::vector<aobd::EnergyCurve> curves;
  std::vector<aobd::SolutionRecord> swept;
};

void write_records(std::ostream& os, const std::vector<aobd::SolutionRecord>& records, const std::string& hash);
std::vector<aobd::SolutionRecord> read_records(std::istream& is, const std::string& source = "<records>");

/// Writes config.ini, records.txt, roots.txt, trace_seed.csv, log.txt and, with a sweep,
/// energy.csv and records_swept.txt into dir (created if needed).
void write_bundle(const ResultBundle& bundle, const std::filesystem::path& dir);
ResultBundle load_bundle(const std::filesystem::path& dir);

/// Runs the full search and, if configured, the b sweep. Does not touch the disk.
ResultBundle run(const RunConfig& config);

struct GridSpec {
  int nr = 21;
  int ntheta = 64;
};

/// Rows "r,theta,x,y,u" on the tensor grid r_k = k/(nr-1), theta_p = 2 pi p / ntheta.
/// A grid with nr == 1 has the single point r = 0.
void export_field(std::ostream& os, const DiscreteProblem& dp, const aobd::SolutionRecord& record, const GridSpec& grid,
                  const std::string& hash);

/// Rows "record_id,b,J,J_over_Jref" (J_over_Jref omitted when no reference is available).
/// The reference is the complete curve with the lowest J at the first b. Returns false when the
/// column had to be omitted.
bool export_energy_curves(std::ostream& os, const std::vector<aobd::EnergyCurve>& curves);

struct RecordCheck {
  int id;
  double stored;
  double recomputed;
  bool ok;
};

struct ValidationReport {
  std::vector<RecordCheck> records;
  bool ok() const;
};

/// Recomputes ||F||_inf of every record; a record passes when the recomputed value is within
/// 10 max(stored, 1e-13).
ValidationReport validate_bundle(const ResultBundle& bundle);

}  // namespace multisol::io
