#pragma once

#include <cstddef>
#include <vector>

namespace cedr {

// Adjusted empirical CDF: F(x) = 1/(2n) + ((n-1)/n^2) * #{X_i <= x}.
// The shrinkage keeps the range strictly inside (0,1) so the normal-quantile
// transform stays finite.
struct EcdfModel {
  std::vector<double> sorted_values;
  std::size_t n = 0;

  // Evaluate the adjusted ECDF at x. Points outside the fitted sample clamp
  // naturally to the interior endpoints 1/(2n) and 1/(2n) + (n-1)/n.
  double evaluate(double x) const;
};

EcdfModel fit_adjusted_ecdf(const std::vector<double>& sample);

// Gaussian-copula control-function term: Phi^{-1}(F(X_i)) elementwise, with
// the adjusted ECDF fitted on the same sample. Rank statistic: invariant to
// strictly increasing transformations; ties share one value.
std::vector<double> copula_term(const std::vector<double>& sample);

struct GofTest {
  double statistic = 0.0;
  double p_value = 1.0;
};

// Anderson-Darling / Cramer-von Mises tests of composite normality (mean and
// variance estimated from the sample). Statistics carry the standard
// small-sample multipliers; p-values use the published case-3 significance
// formulae. Require n >= 8 and nonzero variance.
GofTest anderson_darling_normality(const std::vector<double>& sample);
GofTest cramer_von_mises_normality(const std::vector<double>& sample);

struct NormalityReport {
  double anderson_darling_stat = 0.0;
  double anderson_darling_p = 1.0;
  double cramer_von_mises_stat = 0.0;
  double cramer_von_mises_p = 1.0;
  double skewness = 0.0;
  std::size_t n = 0;
  // Set when both tests fail to reject (p >= 0.05): the covariate looks
  // normal and the copula correction is not identified from it.
  bool weak_identification = false;
};

NormalityReport normality_report(const std::vector<double>& sample);

}  // namespace cedr
