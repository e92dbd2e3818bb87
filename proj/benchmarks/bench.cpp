#include <benchmark/benchmark.h>

#include "multisol/aobd.hpp"
#include "multisol/legendre.hpp"
#include "multisol/trustregion.hpp"

using namespace multisol;

namespace {

DiscreteProblem make(int n) {
  return DiscreteProblem(EllipseDomain(1, 0.8), sine_gordon(30, BoundaryCondition::Dirichlet), n, n);
}

}  // namespace

static void BM_Setup(benchmark::State& st) {
  const int n = static_cast<int>(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(make(n).size());
}
BENCHMARK(BM_Setup)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

static void BM_Residual(benchmark::State& st) {
  const auto dp = make(static_cast<int>(st.range(0)));
  const Eigen::VectorXd xi = aobd::low_mode_guess(dp.M(), dp.N(), 3, 0.5, 1);
  for (auto _ : st) benchmark::DoNotOptimize(dp.residual(xi).data());
}
BENCHMARK(BM_Residual)->Arg(8)->Arg(16)->Arg(24);

static void BM_Jacobian(benchmark::State& st) {
  const auto dp = make(static_cast<int>(st.range(0)));
  const Eigen::VectorXd xi = aobd::low_mode_guess(dp.M(), dp.N(), 3, 0.5, 1);
  for (auto _ : st) benchmark::DoNotOptimize(dp.jacobian(xi).data());
}
BENCHMARK(BM_Jacobian)->Arg(8)->Arg(16)->Arg(24)->Unit(benchmark::kMillisecond);

static void BM_Dogleg(benchmark::State& st) {
  const auto dp = make(static_cast<int>(st.range(0)));
  const Eigen::VectorXd xi = aobd::low_mode_guess(dp.M(), dp.N(), 3, 0.5, 1);
  const Eigen::MatrixXd J = dp.jacobian(xi);
  const Eigen::VectorXd g = J.transpose() * dp.residual(xi);
  const Eigen::MatrixXd G = J.transpose() * J;
  for (auto _ : st) benchmark::DoNotOptimize(trust::dogleg_step(g, G, 0.1 * g.norm()).data());
}
BENCHMARK(BM_Dogleg)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

static void BM_SeedSolve(benchmark::State& st) {
  const auto dp = make(static_cast<int>(st.range(0)));
  const Eigen::VectorXd chi = aobd::linear_mode(dp, 0);
  for (auto _ : st) benchmark::DoNotOptimize(aobd::polish(dp, 2.3 * chi, aobd::AobdConfig::default_solver()).x.data());
}
BENCHMARK(BM_SeedSolve)->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);

static void BM_ClosedForm(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(legendre::closed_form_matrix(legendre::ClosedForm::C, 64).to_dense().data());
}
BENCHMARK(BM_ClosedForm);

BENCHMARK_MAIN();
