#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "cedr/glm.hpp"
#include "cedr/matrix.hpp"

namespace cedr {

// One rectangular observational study: outcome, binary treatment, and
// covariates partitioned into exogenous and endogenous blocks.
struct StudyData {
  std::vector<double> y;
  std::vector<double> t;
  Matrix exogenous;
  Matrix endogenous;
  std::vector<std::string> exogenous_names;
  std::vector<std::string> endogenous_names;

  std::size_t n() const { return y.size(); }
  // Throws on length mismatches, missing treatment arms, non-binary
  // treatment values, or non-finite entries.
  void validate() const;
  // Column lookup across both blocks; throws ConfigError for unknown names.
  std::vector<double> column(const std::string& name) const;
  bool is_endogenous(const std::string& name) const;
};

// Which covariates enter the propensity and outcome models. Deliberate
// omissions (the misspecification scenarios) are expressed here; the data
// are never altered.
struct ModelSpec {
  std::vector<std::string> ps_columns;
  std::vector<std::string> outcome_columns;
};

enum class EstimatorKind { naive_dr, cedr };

struct AteEstimate {
  EstimatorKind estimator = EstimatorKind::naive_dr;
  double ate = 0.0;
  // Fitted propensity range after clipping to [0.01, 0.99].
  double min_propensity = 0.0;
  double max_propensity = 0.0;
  bool ps_converged = false;
  bool m1_converged = false;
  bool m0_converged = false;
};

// Propensity clipping bounds shared by both estimators.
inline constexpr double kPropensityClipLo = 0.01;
inline constexpr double kPropensityClipHi = 0.99;

// The AIPW / doubly robust ATE formula. e_hat must be strictly inside
// (0,1); a propensity of exactly 0 or 1 raises OverlapError.
double dr_ate(const std::vector<double>& y, const std::vector<double>& t,
              const std::vector<double>& e_hat,
              const std::vector<double>& m1_hat,
              const std::vector<double>& m0_hat);

// Standard doubly robust estimator: probit propensity score, per-arm OLS
// outcome models, no endogeneity correction.
AteEstimate naive_dr(const StudyData& data, const ModelSpec& spec);

// Single-equation copula-augmented regression: OLS of y on
// [1, x, copula_term(x)]. The coefficient on x is the debiased slope.
// Raises CollinearityError when x is (near-)normal, in which case the copula
// term is a linear transform of x and the correction is unidentified.
FittedGlm copula_augmented_ols(const std::vector<double>& x_endo,
                               const std::vector<double>& y);

// The CEDR estimator: copula terms for each endogenous covariate computed
// once on the full sample, included in the probit propensity and per-arm
// outcome fits, then dropped at prediction time. Refuses to run (unless
// force = true) when every endogenous covariate passes both normality tests.
AteEstimate cedr(const StudyData& data, const ModelSpec& spec,
                 bool force = false);

// Dispatch helper used by inference and the Monte Carlo runner.
AteEstimate estimate_ate(const StudyData& data, const ModelSpec& spec,
                         EstimatorKind kind, bool force = false);

}  // namespace cedr
