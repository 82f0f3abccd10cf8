#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <vector>

#include "cedr/matrix.hpp"

namespace cedr {

// Role of a design column. Copula columns are the control-function terms
// appended for endogenous covariates; their coefficients are used during
// fitting but discarded at prediction time.
enum class ColumnRole { intercept, exogenous, endogenous, copula };

struct DesignSpec {
  std::vector<std::string> names;
  std::vector<ColumnRole> roles;

  // Throws ConfigError if names/roles disagree in length or the spec does
  // not contain exactly one intercept column.
  void validate() const;
  std::size_t size() const { return names.size(); }
};

enum class GlmFamily { ols, probit };

struct FittedGlm {
  GlmFamily family = GlmFamily::ols;
  DesignSpec spec;
  std::vector<double> coefficients;
  double residual_variance = 0.0;  // OLS only: RSS / (n - p)
  bool converged = false;
  int iterations = 0;
  double log_likelihood = 0.0;  // probit only
};

// Least squares via rank-revealing QR. Throws CollinearityError (naming the
// dependent columns) when the design is rank-deficient.
FittedGlm ols_fit(const Matrix& design, const DesignSpec& spec,
                  const std::vector<double>& y);

// Probit maximum likelihood: Newton-Raphson on the exact Hessian with
// step-halving, initialized at the linear-probability OLS coefficients.
// Converged when the gradient infinity-norm drops below 1e-8. Throws
// SeparationError when coefficients run away (|coef| > 50) and
// ConvergenceError when the iteration budget (100) is exhausted.
FittedGlm probit_fit(const Matrix& design, const DesignSpec& spec,
                     const std::vector<double>& t);

// Predict from a fit, skipping coefficients whose role is in drop_roles.
// `design` must carry exactly the columns of the fit's spec minus the
// dropped roles, in the original order. OLS returns the linear index,
// probit returns Phi(index).
std::vector<double> glm_predict(const FittedGlm& fit, const Matrix& design,
                                const std::set<ColumnRole>& drop_roles);

}  // namespace cedr
