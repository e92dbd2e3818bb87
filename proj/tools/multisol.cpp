// multisol: compute multiple solutions of semilinear elliptic problems on ellipses.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "multisol/errors.hpp"
#include "multisol/galerkin.hpp"
#include "multisol/io.hpp"

namespace fs = std::filesystem;
using namespace multisol;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kNoSolutions = 3;
constexpr int kValidationFailure = 4;

// Flags that map one-to-one onto config keys. Collected as text and applied after the
// config file so that the command line wins.
struct Overrides {
  std::vector<std::pair<std::string, std::string>> flags{
      {"problem.name", ""},         {"problem.parameter", ""},     {"problem.bc", ""},
      {"domain.a", ""},             {"domain.b", ""},              {"discretization.M", ""},
      {"discretization.N", ""},     {"discretization.radial_points", ""},
      {"discretization.angular_points", ""},
      {"solver.eps_g", ""},         {"solver.eps_v", ""},          {"solver.max_iter", ""},
      {"solver.residual_tol", ""},  {"solver.record_tol", ""},     {"basis.budget", ""},
      {"basis.enrich_starts", ""},  {"basis.max_paths", ""},       {"basis.inner_product", ""},
      {"sweep.b_end", ""},          {"sweep.steps", ""},           {"run.output", ""}};

  void attach(CLI::App* app) {
    for (auto& [key, value] : flags) {
      std::string name = key.substr(key.find('.') + 1);
      if (key == "problem.name") name = "problem";
      if (key == "basis.budget") name = "basis-budget";
      if (key == "run.output") name = "output,-o";
      if (key.rfind("sweep.", 0) == 0) name = "sweep-" + name;
      for (auto& ch : name)
        if (ch == '_') ch = '-';
      app->add_option("--" + name, value, "sets " + key);
    }
  }

  void apply(io::RunConfig& c) const {
    for (const auto& [key, value] : flags)
      if (!value.empty()) c.set(key, value);
  }
};

io::RunConfig base_config(const std::string& path) {
  return path.empty() ? io::RunConfig{} : io::load_config(path);
}

int cmd_run(const std::string& config_path, const Overrides& ov, std::uint64_t seed) {
  io::RunConfig c = base_config(config_path);
  ov.apply(c);
  c.seed = seed;
  c.seed_given = true;
  c.validate();
  const auto bundle = io::run(c);
  io::write_bundle(bundle, c.output);
  std::cout << "wrote " << bundle.records.size() << " records to " << c.output << "\n";
  for (std::size_t k = 0; k < bundle.records.size(); ++k) {
    const auto& r = bundle.records[k];
    std::cout << "  " << k << "  J = " << io::format_double(r.J) << "  |F|inf = " << r.residual_inf << "\n";
  }
  if (bundle.records.empty()) {
    std::cerr << "no solutions found\n";
    return kNoSolutions;
  }
  return kOk;
}

int cmd_sweep(const std::string& dir, double b_end, int steps) {
  io::ResultBundle bundle = io::load_bundle(dir);
  if (bundle.records.empty()) {
    std::cerr << "bundle has no records to continue\n";
    return kNoSolutions;
  }
  bundle.config.sweep = {b_end, steps};
  bundle.config.validate();
  const auto dp = bundle.config.discrete_problem();
  auto cont = aobd::continue_in_geometry(dp, bundle.records, b_end, steps, bundle.config.aobd_config());
  bundle.curves = std::move(cont.curves);
  bundle.swept = std::move(cont.records);

  const std::string hash = io::config_hash(bundle.config);
  // Rewrite the parts that depend on the config echo; the solve itself is untouched.
  {
    std::ofstream os(fs::path(dir) / "config.ini");
    os << io::echo(bundle.config);
  }
  {
    std::ofstream os(fs::path(dir) / "records.txt");
    io::write_records(os, bundle.records, hash);
  }
  {
    std::ofstream os(fs::path(dir) / "records_swept.txt");
    io::write_records(os, bundle.swept, hash);
  }
  std::ofstream os(fs::path(dir) / "energy.csv");
  if (!io::export_energy_curves(os, bundle.curves))
    std::cerr << "warning: no complete reference curve; J_over_Jref column omitted\n";
  int truncated = 0;
  for (const auto& c : bundle.curves) truncated += c.truncated;
  std::cout << bundle.curves.size() << " curves, " << truncated << " truncated\n";
  return kOk;
}

int cmd_export(const std::string& dir, int record, const io::GridSpec& grid, const std::string& out) {
  const auto bundle = io::load_bundle(dir);
  if (record < 0 || record >= static_cast<int>(bundle.records.size())) {
    std::cerr << "record id out of range (bundle has " << bundle.records.size() << ")\n";
    return kConfigError;
  }
  const auto dp = bundle.config.discrete_problem();
  const std::string hash = io::config_hash(bundle.config);
  if (out.empty() || out == "-") {
    io::export_field(std::cout, dp, bundle.records[record], grid, hash);
  } else {
    std::ofstream os(out);
    if (!os) throw ArgumentError("cannot write " + out);
    io::export_field(os, dp, bundle.records[record], grid, hash);
  }
  return kOk;
}

int cmd_eigs(const std::string& bc, double a, double b, int M, int N, int count) {
  const auto vals = linear_eigenvalues(EllipseDomain(a, b), parse_boundary_condition(bc), M, N, count);
  for (std::size_t k = 0; k < vals.size(); ++k) std::cout << k + 1 << ' ' << io::format_double(vals[k]) << "\n";
  return kOk;
}

int cmd_validate(const std::string& dir) {
  io::ResultBundle bundle;
  try {
    bundle = io::load_bundle(dir);
  } catch (const ConfigError& e) {
    // A payload that no longer parses is corruption, not a user config mistake.
    std::cerr << "invalid bundle: " << e.what() << "\n";
    return kValidationFailure;
  }
  const auto rep = io::validate_bundle(bundle);
  for (const auto& r : rep.records)
    std::cout << "record " << r.id << "  stored " << r.stored << "  recomputed " << r.recomputed
              << (r.ok ? "  ok" : "  FAILED") << "\n";
  if (!rep.ok()) {
    std::cerr << "validation failed\n";
    return kValidationFailure;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiple solutions of semilinear elliptic problems on an ellipse"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "seed, enrich and refine; write a result bundle");
  std::string config_path;
  std::uint64_t seed = 0;
  Overrides ov;
  run->add_option("--config,-c", config_path, "INI-style run configuration")->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "RNG seed")->required();
  ov.attach(run);

  auto* sweep = app.add_subcommand("sweep", "continue the records of a bundle in b");
  std::string sweep_dir;
  double b_end = 1.0;
  int steps = 0;
  sweep->add_option("bundle", sweep_dir, "bundle directory")->required()->check(CLI::ExistingDirectory);
  sweep->add_option("--b-end", b_end, "target semi-axis b")->required();
  sweep->add_option("--steps", steps, "number of equal b steps")->required()->check(CLI::PositiveNumber);

  auto* exp = app.add_subcommand("export", "write one record on a polar grid as CSV");
  std::string exp_dir, exp_out;
  int record = 0;
  io::GridSpec grid;
  exp->add_option("bundle", exp_dir, "bundle directory")->required()->check(CLI::ExistingDirectory);
  exp->add_option("--record", record, "record id")->required();
  exp->add_option("--nr", grid.nr, "radial grid points")->check(CLI::PositiveNumber);
  exp->add_option("--ntheta", grid.ntheta, "angular grid points")->check(CLI::PositiveNumber);
  exp->add_option("--out", exp_out, "output file (default stdout)");

  auto* eigs = app.add_subcommand("eigs", "lowest eigenvalues of -Lap on the ellipse");
  std::string bc = "dirichlet";
  double a = 1.0, b = 1.0;
  int M = 20, N = 20, count = 6;
  eigs->add_option("--bc", bc, "dirichlet or neumann");
  eigs->add_option("--a", a, "semi-axis a");
  eigs->add_option("--b", b, "semi-axis b");
  eigs->add_option("--M", M, "Fourier modes");
  eigs->add_option("--N", N, "radial degree");
  eigs->add_option("--count", count, "how many eigenvalues")->check(CLI::PositiveNumber);

  auto* val = app.add_subcommand("validate", "recompute residuals of a bundle");
  std::string val_dir;
  val->add_option("bundle", val_dir, "bundle directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*run) return cmd_run(config_path, ov, seed);
    if (*sweep) return cmd_sweep(sweep_dir, b_end, steps);
    if (*exp) return cmd_export(exp_dir, record, grid, exp_out);
    if (*eigs) return cmd_eigs(bc, a, b, M, N, count);
    if (*val) return cmd_validate(val_dir);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const ArgumentError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kOk;
}
