#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "multisol/errors.hpp"
#include "multisol/io.hpp"

using namespace multisol;
namespace fs = std::filesystem;

namespace {

io::RunConfig small_config() {
  io::RunConfig c;
  c.problem = "henon";
  c.parameter = 1.0;
  c.M = 4;
  c.N = 6;
  c.basis_budget = 2;
  c.enrich_starts = 3;
  c.seed = 3;
  c.seed_given = true;
  return c;
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("multisol_io_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Config, ParseSectionsAndDottedKeys) {
  std::istringstream in(
      "# comment\n"
      "[problem]\nname = sine-gordon\nparameter = 20 ; inline\nbc = neumann\n"
      "[domain]\nb = 0.8\n"
      "[discretization]\nM = 10\nN = 11\n"
      "basis.inner_product = l2-domain\n"
      "[run]\nseed = 99\n");
  const auto c = io::parse_config(in);
  EXPECT_EQ(c.problem, "sine-gordon");
  EXPECT_EQ(c.parameter, 20.0);
  EXPECT_EQ(c.bc, BoundaryCondition::Neumann);
  EXPECT_EQ(c.b, 0.8);
  EXPECT_EQ(c.M, 10);
  EXPECT_EQ(c.N, 11);
  EXPECT_EQ(c.inner_product, aobd::InnerProductKind::L2);
  EXPECT_EQ(c.seed, 99u);
  EXPECT_TRUE(c.seed_given);
}

TEST(Config, ErrorsNameLineAndField) {
  const auto fails_with = [](const std::string& text, const std::string& needle) {
    std::istringstream in(text);
    try {
      io::parse_config(in, "cfg");
    } catch (const ConfigError& e) {
      return std::string(e.what()).find(needle) != std::string::npos;
    }
    return false;
  };
  EXPECT_TRUE(fails_with("[problem]\nparameter = abc\n", "cfg:2"));
  EXPECT_TRUE(fails_with("[problem]\nparameter = abc\n", "problem.parameter"));
  EXPECT_TRUE(fails_with("[domain]\nb = 2\n", "domain.b"));
  EXPECT_TRUE(fails_with("[discretization]\nN = 1\n", "discretization.N"));
  EXPECT_TRUE(fails_with("[solver]\nresidual_tol = -1\n", "solver.residual_tol"));
  EXPECT_TRUE(fails_with("[solver]\nbogus = 1\n", "unknown key"));
  EXPECT_TRUE(fails_with("M = 3\n", "outside any section"));
  EXPECT_TRUE(fails_with("[problem\n", "cfg:1"));
  EXPECT_TRUE(fails_with("[problem]\nname = henon\nbc = neumann\n", "problem.bc"));
  EXPECT_THROW(io::load_config("/nonexistent/multisol.ini"), ConfigError);
}

TEST(Config, EchoRoundTripAndHash) {
  auto c = small_config();
  c.parameter = 0.1 + 0.2;  // not representable in short decimal
  c.sweep = {0.7, 6};
  c.b = 0.95;
  std::istringstream in(io::echo(c));
  const auto d = io::parse_config(in);
  EXPECT_EQ(io::echo(d), io::echo(c));
  EXPECT_EQ(d.parameter, c.parameter);
  EXPECT_EQ(io::config_hash(d), io::config_hash(c));
  EXPECT_EQ(io::config_hash(c).size(), 16u);
  auto e = c;
  e.output = "elsewhere";
  EXPECT_EQ(io::config_hash(e), io::config_hash(c));
  e.seed = 4;
  EXPECT_NE(io::config_hash(e), io::config_hash(c));
}

TEST(Format, RoundTripExact) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, std::nextafter(1.0, 2.0)})
    EXPECT_EQ(std::strtod(io::format_double(v).c_str(), nullptr), v);
}

TEST(Records, RoundTrip) {
  std::vector<aobd::SolutionRecord> recs;
  for (int k = 0; k < 3; ++k) {
    SpectralCoefficients xi(2, 4, aobd::low_mode_guess(2, 4, 2, 1.0 + k, 10 + k));
    recs.push_back({xi, 1e-13 * (k + 1), -1.0 / 7.0 * k, {0.1, -0.3}, 7 + k, k != 1, k ? "refine" : ""});
  }
  std::ostringstream os;
  io::write_records(os, recs, "abc");
  std::istringstream is(os.str());
  const auto back = io::read_records(is);
  ASSERT_EQ(back.size(), recs.size());
  for (std::size_t k = 0; k < recs.size(); ++k) {
    EXPECT_EQ(back[k].xi.flat(), recs[k].xi.flat());
    EXPECT_EQ(back[k].residual_inf, recs[k].residual_inf);
    EXPECT_EQ(back[k].J, recs[k].J);
    EXPECT_EQ(back[k].amplitudes, recs[k].amplitudes);
    EXPECT_EQ(back[k].iterations, recs[k].iterations);
    EXPECT_EQ(back[k].converged, recs[k].converged);
    EXPECT_EQ(back[k].origin, recs[k].origin);
  }
  std::ostringstream again;
  io::write_records(again, back, "abc");
  EXPECT_EQ(again.str(), os.str());
}

TEST(Records, CorruptionIsReported) {
  SpectralCoefficients xi(2, 3);
  std::ostringstream os;
  io::write_records(os, {{xi, 0, 0, {}, 0, true, "seed"}}, "h");
  std::string text = os.str();
  const auto at = text.find("coefficients 11");
  ASSERT_NE(at, std::string::npos);
  text.replace(at, 15, "coefficients 12");
  std::istringstream is(text);
  EXPECT_THROW(io::read_records(is), ConfigError);
}

TEST(Export, FieldRows) {
  const auto c = small_config();
  const auto dp = c.discrete_problem();
  SpectralCoefficients xi(c.M, c.N, aobd::low_mode_guess(c.M, c.N, 3, 1.0, 1));
  const aobd::SolutionRecord rec{xi, 1e-12, -2.0, {}, 0, true, "seed"};

  std::ostringstream one;
  io::export_field(one, dp, rec, {1, 64}, "h");
  std::istringstream lines(one.str());
  std::string header, cols, row, extra;
  std::getline(lines, header);
  std::getline(lines, cols);
  std::getline(lines, row);
  EXPECT_NE(header.find("config_hash=h"), std::string::npos);
  EXPECT_NE(header.find("J=-2"), std::string::npos);
  EXPECT_EQ(cols, "r,theta,x,y,u");
  EXPECT_FALSE(std::getline(lines, extra));
  // Only the axisymmetric block contributes at r = 0.
  SpectralCoefficients axis = xi;
  for (int k = 0; k < 2 * c.M * (c.N - 1); ++k) axis.flat()[k] = 0;
  EXPECT_EQ(row.substr(row.rfind(',') + 1), io::format_double(dp.evaluate(axis.flat(), 0, 0)));

  std::ostringstream grid;
  io::export_field(grid, dp, rec, {5, 8}, "h");
  std::istringstream g(grid.str());
  std::string line;
  int rows = 0;
  std::getline(g, line);
  std::getline(g, line);
  while (std::getline(g, line)) {
    ++rows;
    if (line.rfind("1,", 0) == 0) EXPECT_LE(std::abs(std::stod(line.substr(line.rfind(',') + 1))), 1e-10);
  }
  EXPECT_EQ(rows, 40);
}

TEST(Export, EnergyCurves) {
  std::vector<aobd::EnergyCurve> curves{{0, {1.0, 0.9, 0.8}, {-4.0, -3.5, -3.0}, false},
                                        {1, {1.0, 0.9, 0.8}, {-8.0, -7.0, -6.0}, false},
                                        {2, {1.0, 0.9}, {-20.0, -19.0}, true}};
  std::ostringstream os;
  EXPECT_TRUE(io::export_energy_curves(os, curves));
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "record_id,b,J,J_over_Jref");
  std::getline(is, line);
  EXPECT_EQ(line, "0,1,-4,0.5");
  int rows = 1;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 8);

  std::ostringstream none;
  EXPECT_FALSE(io::export_energy_curves(none, {{0, {1.0, 0.9}, {-1.0, -2.0}, true}}));
  EXPECT_EQ(none.str().substr(0, none.str().find('\n')), "record_id,b,J");
}

TEST(Bundle, RunWriteLoadValidate) {
  auto c = small_config();
  c.sweep = {0.9, 2};
  const auto bundle = io::run(c);
  ASSERT_FALSE(bundle.records.empty());
  ASSERT_EQ(bundle.curves.size(), bundle.records.size());
  for (std::size_t k = 0; k < bundle.records.size(); ++k) {
    // b = 1 rows reproduce the disk energies
    EXPECT_NEAR(bundle.curves[k].J.front(), bundle.records[k].J, 1e-10 * std::abs(bundle.records[k].J));
    EXPECT_EQ(bundle.curves[k].b.front(), 1.0);
  }

  const auto dir = scratch("bundle");
  io::write_bundle(bundle, dir);
  for (const char* f : {"config.ini", "records.txt", "roots.txt", "trace_seed.csv", "log.txt", "energy.csv",
                        "records_swept.txt", "fields/record_0.csv"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;

  const auto loaded = io::load_bundle(dir);
  EXPECT_EQ(io::echo(loaded.config), io::echo(bundle.config));
  ASSERT_EQ(loaded.records.size(), bundle.records.size());
  EXPECT_TRUE(io::validate_bundle(loaded).ok());

  // Re-exporting a loaded record gives the same bytes as the bundle's field file.
  std::ostringstream os;
  io::export_field(os, loaded.config.discrete_problem(), loaded.records[0], io::GridSpec{},
                   io::config_hash(loaded.config));
  EXPECT_EQ(os.str(), slurp(dir / "fields/record_0.csv"));

  auto bad = loaded;
  bad.records[0].xi.flat()[0] += 1e-3;
  const auto rep = io::validate_bundle(bad);
  EXPECT_FALSE(rep.ok());
  EXPECT_FALSE(rep.records[0].ok);
  fs::remove_all(dir);
}

TEST(Bundle, NoSweepNoContinuationFiles) {
  const auto bundle = io::run(small_config());
  EXPECT_TRUE(bundle.curves.empty());
  const auto dir = scratch("nosweep");
  io::write_bundle(bundle, dir);
  EXPECT_FALSE(fs::exists(dir / "energy.csv"));
  EXPECT_FALSE(fs::exists(dir / "records_swept.txt"));
  fs::remove_all(dir);
}
