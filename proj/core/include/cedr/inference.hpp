#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "cedr/estimators.hpp"

namespace cedr {

struct BootstrapResult {
  double point = 0.0;    // estimate on the original data
  double se = 0.0;       // sd of successful replicates
  double ci_low = 0.0;   // percentile 2.5
  double ci_high = 0.0;  // percentile 97.5
  std::vector<double> replicates;
  std::size_t n_failed = 0;
};

// Nonparametric pairs bootstrap: B row-resamples with replacement, each
// re-running the full pipeline (including ECDF/copula re-estimation).
// Replicates that fail to fit (separation, collinearity) are dropped and
// counted; more than 5% failures raises InferenceUnreliableError. Replicate
// r draws from substream (seed, r), so results are independent of threading.
BootstrapResult bootstrap_estimate(const StudyData& data, const ModelSpec& spec,
                                   EstimatorKind estimator, std::size_t B,
                                   std::uint64_t seed, int threads = 1);

}  // namespace cedr
