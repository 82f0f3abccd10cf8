#include "cedr/copula_diag.hpp"

#include <algorithm>
#include <cmath>

#include "cedr/errors.hpp"
#include "cedr/numerics.hpp"

namespace cedr {

namespace {

void require_finite_sample(const std::vector<double>& sample, const char* what) {
  for (double v : sample) {
    if (!std::isfinite(v)) {
      throw DomainError(std::string(what) + ": non-finite sample value");
    }
  }
}

void require_test_sample(const std::vector<double>& sample, const char* what) {
  if (sample.size() < 8) {
    throw DegenerateInputError(std::string(what) + ": need n >= 8");
  }
  require_finite_sample(sample, what);
  double first = sample.front();
  bool constant = std::all_of(sample.begin(), sample.end(),
                              [&](double v) { return v == first; });
  if (constant) {
    throw DegenerateInputError(std::string(what) + ": constant sample");
  }
}

// Standardize with sample mean / unbiased sd and return Phi(z) sorted.
std::vector<double> sorted_normal_pit(const std::vector<double>& sample) {
  double mu = mean(sample);
  double sd = sample_sd(sample);
  std::vector<double> w(sample.size());
  for (std::size_t i = 0; i < sample.size(); ++i) {
    w[i] = std_normal_cdf((sample[i] - mu) / sd);
  }
  std::sort(w.begin(), w.end());
  return w;
}

// D'Agostino's significance formulae for the composite-normality AD test.
double ad_p_value(double a) {
  if (a >= 0.6) return std::exp(1.2937 - 5.709 * a + 0.0186 * a * a);
  if (a >= 0.34) return std::exp(0.9177 - 4.279 * a - 1.38 * a * a);
  if (a >= 0.2) return 1.0 - std::exp(-8.318 + 42.796 * a - 59.938 * a * a);
  return 1.0 - std::exp(-13.436 + 101.14 * a - 223.73 * a * a);
}

// Significance formulae for the composite-normality CvM test (as tabulated
// for the modified statistic W^2 (1 + 0.5/n)).
double cvm_p_value(double w) {
  if (w < 0.0275) return 1.0 - std::exp(-13.953 + 775.5 * w - 12542.61 * w * w);
  if (w < 0.051) return 1.0 - std::exp(-5.903 + 179.546 * w - 1515.29 * w * w);
  if (w < 0.092) return std::exp(0.886 - 31.62 * w + 10.897 * w * w);
  if (w < 1.1) return std::exp(1.111 - 34.242 * w + 12.832 * w * w);
  // Beyond the tabulated range the quadratic approximation turns upward;
  // report the published floor instead.
  return 7.37e-10;
}

double clamp01(double p) { return std::min(1.0, std::max(0.0, p)); }

}  // namespace

double EcdfModel::evaluate(double x) const {
  const double nd = static_cast<double>(n);
  auto it = std::upper_bound(sorted_values.begin(), sorted_values.end(), x);
  const double count =
      static_cast<double>(std::distance(sorted_values.begin(), it));
  return 1.0 / (2.0 * nd) + (nd - 1.0) / (nd * nd) * count;
}

EcdfModel fit_adjusted_ecdf(const std::vector<double>& sample) {
  if (sample.size() < 2) {
    throw DegenerateInputError("fit_adjusted_ecdf: need n >= 2");
  }
  require_finite_sample(sample, "fit_adjusted_ecdf");
  EcdfModel model;
  model.sorted_values = sample;
  std::sort(model.sorted_values.begin(), model.sorted_values.end());
  model.n = sample.size();
  return model;
}

std::vector<double> copula_term(const std::vector<double>& sample) {
  EcdfModel model = fit_adjusted_ecdf(sample);
  std::vector<double> out(sample.size());
  for (std::size_t i = 0; i < sample.size(); ++i) {
    out[i] = std_normal_quantile(model.evaluate(sample[i]));
  }
  return out;
}

GofTest anderson_darling_normality(const std::vector<double>& sample) {
  require_test_sample(sample, "anderson_darling_normality");
  const std::size_t n = sample.size();
  const double nd = static_cast<double>(n);
  std::vector<double> w = sorted_normal_pit(sample);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double wi = std::min(std::max(w[i], 1e-300), 1.0 - 1e-16);
    const double wr = std::min(std::max(w[n - 1 - i], 1e-300), 1.0 - 1e-16);
    s += (2.0 * static_cast<double>(i) + 1.0) *
         (std::log(wi) + std::log1p(-wr));
  }
  GofTest t;
  double a2 = -nd - s / nd;
  // Small-sample adjustment for estimated mean and variance.
  t.statistic = a2 * (1.0 + 0.75 / nd + 2.25 / (nd * nd));
  t.p_value = clamp01(ad_p_value(t.statistic));
  return t;
}

GofTest cramer_von_mises_normality(const std::vector<double>& sample) {
  require_test_sample(sample, "cramer_von_mises_normality");
  const std::size_t n = sample.size();
  const double nd = static_cast<double>(n);
  std::vector<double> w = sorted_normal_pit(sample);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = (2.0 * static_cast<double>(i) + 1.0) / (2.0 * nd);
    s += (w[i] - u) * (w[i] - u);
  }
  GofTest t;
  double w2 = s + 1.0 / (12.0 * nd);
  t.statistic = w2 * (1.0 + 0.5 / nd);
  t.p_value = clamp01(cvm_p_value(t.statistic));
  return t;
}

NormalityReport normality_report(const std::vector<double>& sample) {
  NormalityReport r;
  GofTest ad = anderson_darling_normality(sample);
  GofTest cvm = cramer_von_mises_normality(sample);
  r.anderson_darling_stat = ad.statistic;
  r.anderson_darling_p = ad.p_value;
  r.cramer_von_mises_stat = cvm.statistic;
  r.cramer_von_mises_p = cvm.p_value;
  r.skewness = sample_skewness(sample);
  r.n = sample.size();
  r.weak_identification = ad.p_value >= 0.05 && cvm.p_value >= 0.05;
  return r;
}

}  // namespace cedr
