#pragma once

#include <cstddef>
#include <vector>

#include "cedr/matrix.hpp"
#include "cedr/rng.hpp"

namespace cedr {

// Standard normal density.
double std_normal_pdf(double x);

// Standard normal CDF, absolute error below 1e-12. Throws DomainError on
// non-finite input.
double std_normal_cdf(double x);

// log Phi(x), numerically stable deep into the left tail.
double std_normal_logcdf(double x);

// Inverse standard normal CDF on p in (0,1), |Phi(result) - p| <= 1e-10.
// Throws DomainError for p outside the open interval.
double std_normal_quantile(double p);

// Inverse Mills ratio phi(z) / Phi(z), stable for large |z|.
double inverse_mills(double z);

// Scaled complementary error function exp(x^2) * erfc(x).
double erfcx(double x);

// Regularized lower incomplete gamma P(a, x).
double regularized_gamma_p(double a, double x);

// Chi-squared CDF and quantile with df >= 1; quantile satisfies
// |CDF(result) - p| <= 1e-8. Throws DomainError for p outside (0,1).
double chi2_cdf(double x, double df);
double chi2_quantile(double p, double df);

// Lower-triangular Cholesky factor of a symmetric positive semidefinite
// matrix. Exactly singular matrices (zero pivots up to rounding) are
// factored with the affected pivot clamped to zero; a genuinely negative
// pivot raises DecompositionError naming the pivot index.
Matrix cholesky(const Matrix& sigma);

// n rows of N(0, L L^T) draws given the lower Cholesky factor L.
Matrix mvn_sample(const Matrix& chol_lower, std::size_t n, RngHandle& rng);

// Skewness m3 / m2^(3/2) with population (biased) central moments. Throws
// DegenerateInputError for n < 3 or zero variance.
double sample_skewness(const std::vector<double>& x);

// Small statistics helpers shared across modules.
double mean(const std::vector<double>& x);
double sample_variance(const std::vector<double>& x);  // ddof = 1
double sample_sd(const std::vector<double>& x);
// Linear-interpolation quantile (same convention as numpy's default).
double quantile(std::vector<double> x, double p);

}  // namespace cedr
