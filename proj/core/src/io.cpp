#include "multisol/io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

#include "multisol/errors.hpp"

namespace multisol::io {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  char* end = nullptr;
  errno = 0;
  const double x = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE || !std::isfinite(x))
    throw ConfigError(key, "expected a finite number, got '" + v + "'");
  return x;
}

long long to_integer(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  char* end = nullptr;
  errno = 0;
  const long long x = std::strtoll(t.c_str(), &end, 10);
  if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE)
    throw ConfigError(key, "expected an integer, got '" + v + "'");
  return x;
}

int to_int(const std::string& key, const std::string& v) {
  const long long x = to_integer(key, v);
  if (x < -2147483647LL || x > 2147483647LL) throw ConfigError(key, "integer out of range");
  return static_cast<int>(x);
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  const std::string t = trim(v);
  if (t.empty() || t[0] == '-') throw ConfigError(key, "expected a non-negative integer, got '" + v + "'");
  char* end = nullptr;
  errno = 0;
  const unsigned long long x = std::strtoull(t.c_str(), &end, 10);
  if (end != t.c_str() + t.size() || errno == ERANGE)
    throw ConfigError(key, "expected a non-negative integer, got '" + v + "'");
  return x;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  std::string w;
  while (ss >> w) out.push_back(w);
  return out;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ArgumentError("cannot write " + path.string());
  os << text;
  if (!os) throw ArgumentError("write failed: " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ArgumentError("cannot read " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  if (key == "problem.name") {
    if (v != "sine-gordon" && v != "henon" && v != "ginzburg-landau") throw ConfigError(key, "unknown problem '" + v + "'");
    problem = v;
  } else if (key == "problem.parameter") {
    parameter = to_double(key, v);
  } else if (key == "problem.bc") {
    try {
      bc = parse_boundary_condition(v);
    } catch (const ArgumentError& e) {
      throw ConfigError(key, e.what());
    }
  } else if (key == "domain.a") {
    a = to_double(key, v);
  } else if (key == "domain.b") {
    b = to_double(key, v);
  } else if (key == "discretization.M") {
    M = to_int(key, v);
  } else if (key == "discretization.N") {
    N = to_int(key, v);
  } else if (key == "discretization.radial_points") {
    radial_points = to_int(key, v);
  } else if (key == "discretization.angular_points") {
    angular_points = to_int(key, v);
  } else if (key == "solver.eps_g") {
    eps_g = to_double(key, v);
  } else if (key == "solver.eps_v") {
    eps_v = to_double(key, v);
  } else if (key == "solver.max_iter") {
    max_iter = to_int(key, v);
  } else if (key == "solver.residual_tol") {
    residual_tol = to_double(key, v);
  } else if (key == "solver.record_tol") {
    record_tol = to_double(key, v);
  } else if (key == "basis.budget") {
    basis_budget = to_int(key, v);
  } else if (key == "basis.enrich_starts") {
    enrich_starts = to_int(key, v);
  } else if (key == "basis.max_paths") {
    max_paths = to_int(key, v);
  } else if (key == "basis.inner_product") {
    try {
      inner_product = aobd::parse_inner_product(v);
    } catch (const ArgumentError& e) {
      throw ConfigError(key, e.what());
    }
  } else if (key == "sweep.b_end") {
    sweep.b_end = to_double(key, v);
  } else if (key == "sweep.steps") {
    sweep.steps = to_int(key, v);
  } else if (key == "run.seed") {
    seed = to_u64(key, v);
    seed_given = true;
  } else if (key == "run.output") {
    if (v.empty()) throw ConfigError(key, "empty output directory");
    output = v;
  } else {
    throw ConfigError(key, "unknown key");
  }
}

void RunConfig::validate() const {
  if (!(parameter > 0.0)) throw ConfigError("problem.parameter", "must be positive");
  if (problem == "henon" && bc != BoundaryCondition::Dirichlet)
    throw ConfigError("problem.bc", "henon is defined with the Dirichlet condition only");
  if (!(a > 0.0)) throw ConfigError("domain.a", "must be positive");
  if (!(b > 0.0 && b <= a)) throw ConfigError("domain.b", "need 0 < b <= a");
  if (M < 1) throw ConfigError("discretization.M", "must be >= 1");
  if (N < 2) throw ConfigError("discretization.N", "must be >= 2");
  if (radial_points < 0) throw ConfigError("discretization.radial_points", "must be >= 0");
  if (angular_points < 0) throw ConfigError("discretization.angular_points", "must be >= 0");
  if (!(eps_g > 0.0)) throw ConfigError("solver.eps_g", "must be positive");
  if (!(eps_v > 0.0)) throw ConfigError("solver.eps_v", "must be positive");
  if (max_iter < 1) throw ConfigError("solver.max_iter", "must be >= 1");
  if (!(residual_tol > 0.0)) throw ConfigError("solver.residual_tol", "must be positive");
  if (!(record_tol > 0.0)) throw ConfigError("solver.record_tol", "must be positive");
  if (basis_budget < 1) throw ConfigError("basis.budget", "must be >= 1");
  if (enrich_starts < 1) throw ConfigError("basis.enrich_starts", "must be >= 1");
  if (max_paths < 1) throw ConfigError("basis.max_paths", "must be >= 1");
  if (sweep.steps < 0) throw ConfigError("sweep.steps", "must be >= 0");
  if (sweep.enabled() && !(sweep.b_end > 0.0 && sweep.b_end <= b))
    throw ConfigError("sweep.b_end", "need 0 < b_end <= domain.b");
}

ProblemSpec RunConfig::problem_spec() const { return make_problem(problem, parameter, bc); }

DiscreteProblem RunConfig::discrete_problem() const {
  return DiscreteProblem(EllipseDomain(a, b), problem_spec(), M, N, QuadratureSizes{radial_points, angular_points});
}

aobd::AobdConfig RunConfig::aobd_config() const {
  aobd::AobdConfig c;
  c.inner_product = inner_product;
  c.seed = seed;
  c.basis_budget = basis_budget;
  c.enrich_starts = enrich_starts;
  c.max_paths = max_paths;
  c.record_tol = record_tol;
  for (auto* tr : {&c.solver, &c.reduced_solver}) {
    tr->eps_g = eps_g;
    tr->eps_v = eps_v;
    tr->residual_tol = residual_tol;
  }
  c.solver.max_iter = max_iter;
  return c;
}

RunConfig parse_config(std::istream& in, const std::string& source) {
  RunConfig c;
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = source + ":" + std::to_string(lineno);
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw ConfigError(where, "empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where, "expected key = value");
    std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError(where, "missing key");
    if (key.find('.') == std::string::npos) {
      if (section.empty()) throw ConfigError(where, "key '" + key + "' outside any section");
      key = section + "." + key;
    }
    try {
      c.set(key, line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(where, e.what());
    }
  }
  try {
    c.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(source, e.what());
  }
  return c;
}

RunConfig load_config(const fs::path& file) {
  std::ifstream is(file);
  if (!is) throw ConfigError(file.string(), "cannot open");
  return parse_config(is, file.string());
}

std::string echo(const RunConfig& c) {
  std::ostringstream os;
  os << "[problem]\n"
     << "name = " << c.problem << "\n"
     << "parameter = " << format_double(c.parameter) << "\n"
     << "bc = " << to_string(c.bc) << "\n\n"
     << "[domain]\n"
     << "a = " << format_double(c.a) << "\n"
     << "b = " << format_double(c.b) << "\n\n"
     << "[discretization]\n"
     << "M = " << c.M << "\n"
     << "N = " << c.N << "\n"
     << "radial_points = " << c.radial_points << "\n"
     << "angular_points = " << c.angular_points << "\n\n"
     << "[solver]\n"
     << "eps_g = " << format_double(c.eps_g) << "\n"
     << "eps_v = " << format_double(c.eps_v) << "\n"
     << "max_iter = " << c.max_iter << "\n"
     << "residual_tol = " << format_double(c.residual_tol) << "\n"
     << "record_tol = " << format_double(c.record_tol) << "\n\n"
     << "[basis]\n"
     << "budget = " << c.basis_budget << "\n"
     << "enrich_starts = " << c.enrich_starts << "\n"
     << "max_paths = " << c.max_paths << "\n"
     << "inner_product = " << aobd::to_string(c.inner_product) << "\n\n"
     << "[sweep]\n"
     << "b_end = " << format_double(c.sweep.b_end) << "\n"
     << "steps = " << c.sweep.steps << "\n\n"
     << "[run]\n"
     << "seed = " << c.seed << "\n"
     << "output = " << c.output << "\n";
  return os.str();
}

std::string config_hash(const RunConfig& c) {
  // The output directory does not affect the computation, so it stays out of the hash.
  RunConfig k = c;
  k.output.clear();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : echo(k)) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

void write_records(std::ostream& os, const std::vector<aobd::SolutionRecord>& records, const std::string& hash) {
  os << "# multisol records\n";
  os << "config_hash " << hash << "\n";
  os << "count " << records.size() << "\n";
  for (std::size_t id = 0; id < records.size(); ++id) {
    const auto& r = records[id];
    os << "record " << id << "\n";
    os << "origin " << (r.origin.empty() ? "-" : r.origin) << "\n";
    os << "M " << r.xi.M() << "\nN " << r.xi.N() << "\n";
    os << "residual_inf " << format_double(r.residual_inf) << "\n";
    os << "J " << format_double(r.J) << "\n";
    os << "iterations " << r.iterations << "\n";
    os << "converged " << (r.converged ? 1 : 0) << "\n";
    os << "amplitudes " << r.amplitudes.size();
    for (double a : r.amplitudes) os << ' ' << format_double(a);
    os << "\ncoefficients " << r.xi.size() << "\n";
    for (int k = 0; k < r.xi.size(); ++k) os << format_double(r.xi.flat()[k]) << "\n";
    os << "end\n";
  }
}

std::vector<aobd::SolutionRecord> read_records(std::istream& is, const std::string& source) {
  std::vector<aobd::SolutionRecord> out;
  std::string line;
  int lineno = 0;
  const auto next = [&](const std::string& expect) {
    while (std::getline(is, line)) {
      ++lineno;
      if (!trim(line).empty() && trim(line)[0] != '#') break;
      line.clear();
    }
    auto words = split_ws(line);
    if (words.empty() || (!expect.empty() && words[0] != expect))
      throw ConfigError(source + ":" + std::to_string(lineno), "expected '" + expect + "'");
    return words;
  };
  const auto where = [&] { return source + ":" + std::to_string(lineno); };
  next("config_hash");
  const auto count_words = next("count");
  if (count_words.size() != 2) throw ConfigError(where(), "malformed count");
  const auto count = to_integer(where(), count_words[1]);
  for (long long id = 0; id < count; ++id) {
    next("record");
    const auto origin = next("origin");
    const int M = to_int(where(), next("M").at(1));
    const int N = to_int(where(), next("N").at(1));
    const double res = to_double(where(), next("residual_inf").at(1));
    const double J = to_double(where(), next("J").at(1));
    const int it = to_int(where(), next("iterations").at(1));
    const bool conv = to_int(where(), next("converged").at(1)) != 0;
    const auto amps = next("amplitudes");
    const auto na = to_integer(where(), amps.at(1));
    if (na < 0 || static_cast<std::size_t>(na) + 2 != amps.size()) throw ConfigError(where(), "malformed amplitudes");
    const auto nc_words = next("coefficients");
    const auto nc = to_integer(where(), nc_words.at(1));
    if (M < 1 || N < 2 || nc != SpectralCoefficients::flat_size(M, N))
      throw ConfigError(where(), "coefficient count does not match M, N");
    Eigen::VectorXd flat(nc);
    for (long long k = 0; k < nc; ++k) {
      const auto w = next("");
      flat[k] = to_double(where(), w.at(0));
    }
    next("end");
    aobd::SolutionRecord r{SpectralCoefficients(M, N, flat), res, J, {}, it, conv,
                           origin.size() > 1 && origin[1] != "-" ? origin[1] : std::string()};
    for (std::size_t k = 2; k < amps.size(); ++k) r.amplitudes.push_back(to_double(where(), amps[k]));
    out.push_back(std::move(r));
  }
  return out;
}

void export_field(std::ostream& os, const DiscreteProblem& dp, const aobd::SolutionRecord& record, const GridSpec& grid,
                  const std::string& hash) {
  if (grid.nr < 1 || grid.ntheta < 1) throw ArgumentError("export_field: grid sizes must be positive");
  os << "# config_hash=" << hash << " residual_inf=" << format_double(record.residual_inf)
     << " J=" << format_double(record.J) << "\n";
  os << "r,theta,x,y,u\n";
  const auto row = [&](double r, double th) {
    const auto p = map_to_cartesian(dp.domain(), r, th);
    os << format_double(r) << ',' << format_double(th) << ',' << format_double(p.x) << ',' << format_double(p.y) << ','
       << format_double(dp.evaluate(record.xi.flat(), r, th)) << "\n";
  };
  if (grid.nr == 1) {
    row(0.0, 0.0);
    return;
  }
  for (int k = 0; k < grid.nr; ++k) {
    const double r = static_cast<double>(k) / (grid.nr - 1);
    for (int p = 0; p < grid.ntheta; ++p) row(r, 2.0 * std::numbers::pi * p / grid.ntheta);
  }
}

bool export_energy_curves(std::ostream& os, const std::vector<aobd::EnergyCurve>& curves) {
  int ref = -1;
  for (int k = 0; k < static_cast<int>(curves.size()); ++k) {
    const auto& c = curves[k];
    if (c.truncated || c.J.empty()) continue;
    bool nonzero = true;
    for (double j : c.J) nonzero = nonzero && j != 0.0;
    if (!nonzero) continue;
    if (ref < 0 || c.J.front() < curves[ref].J.front()) ref = k;
  }
  const bool with_ref = ref >= 0;
  os << "record_id,b,J" << (with_ref ? ",J_over_Jref" : "") << "\n";
  for (const auto& c : curves)
    for (std::size_t k = 0; k < c.b.size(); ++k) {
      os << c.record_id << ',' << format_double(c.b[k]) << ',' << format_double(c.J[k]);
      if (with_ref) {
        // Reference value at the same b (curves share the grid; a truncated curve is shorter).
        os << ',' << format_double(c.J[k] / curves[ref].J[k]);
      }
      os << "\n";
    }
  return with_ref;
}

void write_bundle(const ResultBundle& bundle, const fs::path& dir) {
  fs::create_directories(dir);
  const std::string hash = config_hash(bundle.config);
  write_file(dir / "config.ini", echo(bundle.config));
  {
    std::ostringstream os;
    write_records(os, bundle.records, hash);
    write_file(dir / "records.txt", os.str());
  }
  {
    std::ostringstream os;
    os << "# step 2 amplitude roots\n";
    for (double r : bundle.seed_roots) os << format_double(r) << "\n";
    write_file(dir / "roots.txt", os.str());
  }
  {
    std::ostringstream os;
    trust::write_trace_csv(os, bundle.seed_trace);
    write_file(dir / "trace_seed.csv", os.str());
  }
  {
    std::ostringstream os;
    for (const auto& l : bundle.log) os << l << "\n";
    write_file(dir / "log.txt", os.str());
  }
  const auto dp = bundle.config.discrete_problem();
  fs::create_directories(dir / "fields");
  for (std::size_t id = 0; id < bundle.records.size(); ++id) {
    std::ostringstream os;
    export_field(os, dp, bundle.records[id], GridSpec{}, hash);
    write_file(dir / "fields" / ("record_" + std::to_string(id) + ".csv"), os.str());
  }
  if (!bundle.curves.empty()) {
    std::ostringstream os;
    export_energy_curves(os, bundle.curves);
    write_file(dir / "energy.csv", os.str());
    std::ostringstream rs;
    write_records(rs, bundle.swept, hash);
    write_file(dir / "records_swept.txt", rs.str());
  }
}

ResultBundle load_bundle(const fs::path& dir) {
  ResultBundle b;
  b.config = load_config(dir / "config.ini");
  std::istringstream rs(read_file(dir / "records.txt"));
  b.records = read_records(rs, (dir / "records.txt").string());
  return b;
}

ResultBundle run(const RunConfig& config) {
  config.validate();
  ResultBundle bundle;
  bundle.config = config;
  const auto dp = config.discrete_problem();
  const auto cfg = config.aobd_config();
  auto res = aobd::solve(dp, cfg);
  bundle.records = std::move(res.records);
  bundle.seed_roots = std::move(res.seed_roots);
  bundle.seed_trace = std::move(res.seed.report);
  bundle.log = std::move(res.log);
  bundle.log.push_back("records: " + std::to_string(bundle.records.size()) +
                       ", failures: " + std::to_string(res.failures));
  if (config.sweep.enabled() && !bundle.records.empty()) {
    auto cont = aobd::continue_in_geometry(dp, bundle.records, config.sweep.b_end, config.sweep.steps, cfg);
    bundle.curves = std::move(cont.curves);
    bundle.swept = std::move(cont.records);
    int truncated = 0;
    for (const auto& c : bundle.curves) truncated += c.truncated ? 1 : 0;
    bundle.log.push_back("sweep to b = " + format_double(config.sweep.b_end) + ": " + std::to_string(truncated) +
                         " curves truncated");
  }
  return bundle;
}

bool ValidationReport::ok() const {
  for (const auto& r : records)
    if (!r.ok) return false;
  return true;
}

ValidationReport validate_bundle(const ResultBundle& bundle) {
  const auto dp = bundle.config.discrete_problem();
  ValidationReport rep;
  for (std::size_t id = 0; id < bundle.records.size(); ++id) {
    const auto& r = bundle.records[id];
    RecordCheck c{static_cast<int>(id), r.residual_inf, std::numeric_limits<double>::infinity(), false};
    if (r.xi.M() == dp.M() && r.xi.N() == dp.N() && r.xi.flat().allFinite()) {
      c.recomputed = dp.residual(r.xi.flat()).cwiseAbs().maxCoeff();
      c.ok = c.recomputed <= 10.0 * std::max(r.residual_inf, 1e-13);
    }
    rep.records.push_back(c);
  }
  return rep;
}

}  // namespace multisol::io
