#include <benchmark/benchmark.h>

#include <vector>

#include "cedr/copula_diag.hpp"
#include "cedr/estimators.hpp"
#include "cedr/glm.hpp"
#include "cedr/numerics.hpp"
#include "cedr/rng.hpp"
#include "cedr/simulation.hpp"

namespace {

cedr::DgpConfig calibrated_s1(std::size_t n) {
  cedr::DgpConfig c;
  c.scenario = cedr::Scenario::one;
  c.rho = 0.5;
  c.n = n;
  cedr::RngHandle cal(1);
  c.calibrated_intercept = cedr::calibrate_intercept(c, cal);
  return c;
}

void BM_NormalQuantile(benchmark::State& state) {
  double p = 0.0001;
  for (auto _ : state) {
    benchmark::DoNotOptimize(cedr::std_normal_quantile(p));
    p += 1e-4;
    if (p >= 1.0) p = 1e-4;
  }
}
BENCHMARK(BM_NormalQuantile);

void BM_CopulaTerm8000(benchmark::State& state) {
  cedr::RngHandle rng(3);
  std::vector<double> x(8000);
  for (auto& v : x) v = rng.normal();
  for (auto _ : state) {
    benchmark::DoNotOptimize(cedr::copula_term(x));
  }
}
BENCHMARK(BM_CopulaTerm8000);

void BM_ProbitFit8000(benchmark::State& state) {
  cedr::RngHandle rng(4);
  const std::size_t n = 8000;
  cedr::Matrix x(n, 4);
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = rng.normal();
    x(i, 2) = rng.normal();
    x(i, 3) = rng.bernoulli(0.3);
    t[i] = rng.uniform() <
                   cedr::std_normal_cdf(-0.5 + x(i, 1) - x(i, 2) + x(i, 3))
               ? 1.0
               : 0.0;
  }
  cedr::DesignSpec spec;
  spec.names = {"(intercept)", "a", "b", "c"};
  spec.roles = {cedr::ColumnRole::intercept, cedr::ColumnRole::exogenous,
                cedr::ColumnRole::exogenous, cedr::ColumnRole::exogenous};
  for (auto _ : state) {
    benchmark::DoNotOptimize(cedr::probit_fit(x, spec, t));
  }
}
BENCHMARK(BM_ProbitFit8000);

void BM_Generate8000(benchmark::State& state) {
  const cedr::DgpConfig config = calibrated_s1(8000);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    cedr::RngHandle rng(++seed);
    benchmark::DoNotOptimize(cedr::generate(config, rng));
  }
}
BENCHMARK(BM_Generate8000);

void BM_CedrEndToEnd8000(benchmark::State& state) {
  const cedr::DgpConfig config = calibrated_s1(8000);
  cedr::RngHandle rng(7);
  auto [data, tau] = cedr::generate(config, rng);
  const cedr::ModelSpec spec = cedr::model_spec_for(
      cedr::Scenario::one, cedr::MisspecTag::both_correct);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cedr::cedr(data, spec));
  }
}
BENCHMARK(BM_CedrEndToEnd8000);

}  // namespace

BENCHMARK_MAIN();
