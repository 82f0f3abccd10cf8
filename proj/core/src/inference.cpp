#include "cedr/inference.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "cedr/errors.hpp"
#include "cedr/numerics.hpp"
#include "cedr/rng.hpp"

namespace cedr {

namespace {

StudyData resample_rows(const StudyData& data, RngHandle& rng) {
  const std::size_t n = data.n();
  StudyData out;
  out.exogenous_names = data.exogenous_names;
  out.endogenous_names = data.endogenous_names;
  out.y.resize(n);
  out.t.resize(n);
  out.exogenous = Matrix(n, data.exogenous.cols());
  out.endogenous = Matrix(n, data.endogenous.cols());
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = rng.uniform_index(n);
    out.y[i] = data.y[r];
    out.t[i] = data.t[r];
    for (std::size_t j = 0; j < data.exogenous.cols(); ++j)
      out.exogenous(i, j) = data.exogenous(r, j);
    for (std::size_t j = 0; j < data.endogenous.cols(); ++j)
      out.endogenous(i, j) = data.endogenous(r, j);
  }
  return out;
}

}  // namespace

BootstrapResult bootstrap_estimate(const StudyData& data, const ModelSpec& spec,
                                   EstimatorKind estimator, std::size_t B,
                                   std::uint64_t seed, int threads) {
  if (B < 100) {
    throw ConfigError("bootstrap_estimate: need B >= 100");
  }
  data.validate();

  BootstrapResult result;
  // The weak-identification gate (if any) is the caller's concern on the
  // original data; inside the bootstrap we always force so that borderline
  // resamples do not masquerade as fit failures.
  result.point = estimate_ate(data, spec, estimator, /*force=*/true).ate;

  RngHandle root(seed);
  std::vector<double> reps(B, 0.0);
  std::vector<char> ok(B, 0);

  const int n_threads =
      std::max(1, std::min<int>(threads, static_cast<int>(B)));
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t r = next.fetch_add(1);
      if (r >= B) return;
      RngHandle rng = root.substream(r);
      StudyData boot = resample_rows(data, rng);
      try {
        reps[r] = estimate_ate(boot, spec, estimator, /*force=*/true).ate;
        ok[r] = 1;
      } catch (const Error&) {
        ok[r] = 0;  // counted below; a resample can degenerate
      }
    }
  };
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (std::size_t r = 0; r < B; ++r) {
    if (ok[r]) {
      result.replicates.push_back(reps[r]);
    } else {
      ++result.n_failed;
    }
  }
  if (result.n_failed * 20 > B) {
    throw InferenceUnreliableError(
        "bootstrap_estimate: " + std::to_string(result.n_failed) + " of " +
            std::to_string(B) + " replicates failed (over the 5% ceiling)",
        result.n_failed, B);
  }
  result.se = sample_sd(result.replicates);
  result.ci_low = quantile(result.replicates, 0.025);
  result.ci_high = quantile(result.replicates, 0.975);
  return result;
}

}  // namespace cedr
