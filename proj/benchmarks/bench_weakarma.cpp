#include <benchmark/benchmark.h>

#include "weakarma/dist.hpp"
#include "weakarma/estimate.hpp"
#include "weakarma/selfnorm.hpp"
#include "weakarma/simulate.hpp"

namespace {

using namespace weakarma;

TimeSeries arma11_series(int n) {
  const VarmaSpec spec = VarmaSpec::full(1, 1, 1);
  RngStream rng(1, 0);
  return simulate_varma(spec, Eigen::Vector2d{0.95, -0.6},
                        StrongGaussian{Eigen::MatrixXd::Identity(1, 1)}, n, 1000,
                        rng);
}

TimeSeries varma11_series(int n) {
  const VarmaSpec spec = VarmaSpec::full(2, 1, 1);
  Eigen::VectorXd theta(8);
  theta << 1.2, -0.5, 0.6, 0.3, -0.6, 0.3, 0.3, 0.6;
  RngStream rng(2, 0);
  return simulate_varma(spec, theta,
                        StrongGaussian{Eigen::MatrixXd::Identity(2, 2)}, n, 1000,
                        rng);
}

void BM_ResidualFilter(benchmark::State& state) {
  const VarmaSpec spec = VarmaSpec::full(1, 1, 1);
  const Eigen::Vector2d theta{0.95, -0.6};
  const TimeSeries x = arma11_series(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(residual_filter(spec, theta, x));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ResidualFilter)->Arg(2000)->Arg(10000);

void BM_ResidualDerivativesVarma(benchmark::State& state) {
  const VarmaSpec spec = VarmaSpec::full(2, 1, 1);
  Eigen::VectorXd theta(8);
  theta << 1.2, -0.5, 0.6, 0.3, -0.6, 0.3, 0.3, 0.6;
  const TimeSeries x = varma11_series(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(residual_derivatives(spec, theta, x));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ResidualDerivativesVarma)->Arg(2000);

void BM_QmleFitArma11(benchmark::State& state) {
  const VarmaSpec spec = VarmaSpec::full(1, 1, 1);
  const TimeSeries x = arma11_series(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(qmle_fit(spec, x));
  }
}
BENCHMARK(BM_QmleFitArma11)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_QmleFitVarma11(benchmark::State& state) {
  const VarmaSpec spec = VarmaSpec::full(2, 1, 1);
  const TimeSeries x = varma11_series(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(qmle_fit(spec, x));
  }
}
BENCHMARK(BM_QmleFitVarma11)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_SelfNormPipeline(benchmark::State& state) {
  const VarmaSpec spec = VarmaSpec::full(2, 1, 1);
  Eigen::VectorXd theta(8);
  theta << 1.2, -0.5, 0.6, 0.3, -0.6, 0.3, 0.3, 0.6;
  const int n = static_cast<int>(state.range(0));
  const TimeSeries x = varma11_series(n);
  const ResidualSet resid = residual_derivatives(spec, theta, x);
  const Eigen::MatrixXd sigma = residual_covariance(resid.residuals);
  for (auto _ : state) {
    const AutoCovSet acs = autocov(resid.residuals, 3);
    const SelfNormState s = build_selfnorm_state(resid, sigma, 3);
    benchmark::DoNotOptimize(q_sn(acs.rho, acs.s_e, s.c_hat, n));
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_SelfNormPipeline)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_UkDraws(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(tabulate_uk(k, 1000, 2000, 7, 1));
  }
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_UkDraws)->Arg(1)->Arg(12)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
