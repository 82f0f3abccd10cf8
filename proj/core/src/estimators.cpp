#include "cedr/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cedr/copula_diag.hpp"
#include "cedr/errors.hpp"
#include "cedr/numerics.hpp"

namespace cedr {

namespace {

// Pearson correlation; assumes both vectors have positive variance.
double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double ma = mean(a), mb = mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  return sab / std::sqrt(saa * sbb);
}

// Assemble [intercept | named columns | copula terms] design + spec.
// copula_terms is keyed by endogenous column order; empty when the caller
// wants the uncorrected design.
struct BuiltDesign {
  Matrix full;       // all columns, used for fitting
  Matrix reduced;    // copula columns removed, used for prediction
  DesignSpec spec;
};

BuiltDesign build_design(const StudyData& data,
                         const std::vector<std::string>& columns,
                         const std::vector<std::vector<double>>* copula_by_endo,
                         const std::vector<std::string>* endo_in_model) {
  const std::size_t n = data.n();
  const std::size_t n_cop = copula_by_endo ? copula_by_endo->size() : 0;
  BuiltDesign b;
  b.full = Matrix(n, 1 + columns.size() + n_cop);
  b.spec.names.push_back("(intercept)");
  b.spec.roles.push_back(ColumnRole::intercept);
  for (std::size_t i = 0; i < n; ++i) b.full(i, 0) = 1.0;
  std::size_t j = 1;
  for (const auto& name : columns) {
    b.full.set_column(j, data.column(name));
    b.spec.names.push_back(name);
    b.spec.roles.push_back(data.is_endogenous(name) ? ColumnRole::endogenous
                                                    : ColumnRole::exogenous);
    ++j;
  }
  for (std::size_t k = 0; k < n_cop; ++k) {
    b.full.set_column(j, (*copula_by_endo)[k]);
    b.spec.names.push_back("copula(" + (*endo_in_model)[k] + ")");
    b.spec.roles.push_back(ColumnRole::copula);
    ++j;
  }
  b.reduced = Matrix(n, 1 + columns.size());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < 1 + columns.size(); ++c)
      b.reduced(i, c) = b.full(i, c);
  return b;
}

Matrix select_rows(const Matrix& m, const std::vector<std::size_t>& rows) {
  Matrix out(rows.size(), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(rows[i], j);
  return out;
}

std::vector<double> select(const std::vector<double>& v,
                           const std::vector<std::size_t>& rows) {
  std::vector<double> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) out[i] = v[rows[i]];
  return out;
}

// Shared naive/CEDR pipeline; with_copula toggles the correction.
AteEstimate run_dr_pipeline(const StudyData& data, const ModelSpec& spec,
                            bool with_copula) {
  data.validate();
  if (spec.ps_columns.empty() || spec.outcome_columns.empty()) {
    throw ConfigError("ModelSpec: column lists must be nonempty");
  }

  // Copula terms are computed once per endogenous covariate on the full
  // sample (Algorithm ordering: construction precedes any model fit).
  auto terms_for = [&](const std::vector<std::string>& columns,
                       std::vector<std::vector<double>>& terms,
                       std::vector<std::string>& endo_names) {
    terms.clear();
    endo_names.clear();
    for (const auto& name : columns) {
      if (data.is_endogenous(name)) {
        terms.push_back(copula_term(data.column(name)));
        endo_names.push_back(name);
      }
    }
  };

  std::vector<std::vector<double>> ps_terms, out_terms;
  std::vector<std::string> ps_endo, out_endo;
  if (with_copula) {
    terms_for(spec.ps_columns, ps_terms, ps_endo);
    terms_for(spec.outcome_columns, out_terms, out_endo);
  }

  BuiltDesign ps = build_design(data, spec.ps_columns,
                                with_copula ? &ps_terms : nullptr, &ps_endo);
  BuiltDesign om = build_design(data, spec.outcome_columns,
                                with_copula ? &out_terms : nullptr, &out_endo);

  FittedGlm ps_fit = probit_fit(ps.full, ps.spec, data.t);
  // Copula coefficients correct the fit but are excluded from prediction.
  std::set<ColumnRole> drop =
      with_copula ? std::set<ColumnRole>{ColumnRole::copula}
                  : std::set<ColumnRole>{};
  std::vector<double> e =
      glm_predict(ps_fit, with_copula ? ps.reduced : ps.full, drop);

  std::vector<std::size_t> treated, control;
  for (std::size_t i = 0; i < data.n(); ++i) {
    (data.t[i] == 1.0 ? treated : control).push_back(i);
  }
  FittedGlm m1_fit = ols_fit(select_rows(om.full, treated), om.spec,
                             select(data.y, treated));
  FittedGlm m0_fit = ols_fit(select_rows(om.full, control), om.spec,
                             select(data.y, control));
  std::vector<double> m1 =
      glm_predict(m1_fit, with_copula ? om.reduced : om.full, drop);
  std::vector<double> m0 =
      glm_predict(m0_fit, with_copula ? om.reduced : om.full, drop);

  for (double& ei : e) {
    ei = std::clamp(ei, kPropensityClipLo, kPropensityClipHi);
  }

  AteEstimate est;
  est.estimator = with_copula ? EstimatorKind::cedr : EstimatorKind::naive_dr;
  est.ate = dr_ate(data.y, data.t, e, m1, m0);
  auto [mn, mx] = std::minmax_element(e.begin(), e.end());
  est.min_propensity = *mn;
  est.max_propensity = *mx;
  est.ps_converged = ps_fit.converged;
  est.m1_converged = m1_fit.converged;
  est.m0_converged = m0_fit.converged;
  return est;
}

}  // namespace

void StudyData::validate() const {
  const std::size_t rows = y.size();
  if (t.size() != rows ||
      (exogenous.cols() > 0 && exogenous.rows() != rows) ||
      (endogenous.cols() > 0 && endogenous.rows() != rows)) {
    throw ConfigError("StudyData: column lengths disagree");
  }
  if (exogenous_names.size() != exogenous.cols() ||
      endogenous_names.size() != endogenous.cols()) {
    throw ConfigError("StudyData: name lists do not match covariate blocks");
  }
  bool any0 = false, any1 = false;
  for (double v : t) {
    if (v == 0.0) {
      any0 = true;
    } else if (v == 1.0) {
      any1 = true;
    } else {
      throw ParseError("StudyData: treatment values must be 0 or 1");
    }
  }
  if (!any0 || !any1) {
    throw DegenerateStudyError("StudyData: a treatment arm is empty");
  }
  for (double v : y) {
    if (!std::isfinite(v)) throw DomainError("StudyData: non-finite outcome");
  }
  if (!exogenous.all_finite() || !endogenous.all_finite()) {
    throw DomainError("StudyData: non-finite covariate");
  }
}

std::vector<double> StudyData::column(const std::string& name) const {
  for (std::size_t j = 0; j < exogenous_names.size(); ++j) {
    if (exogenous_names[j] == name) return exogenous.column(j);
  }
  for (std::size_t j = 0; j < endogenous_names.size(); ++j) {
    if (endogenous_names[j] == name) return endogenous.column(j);
  }
  throw ConfigError("StudyData: unknown column '" + name + "'");
}

bool StudyData::is_endogenous(const std::string& name) const {
  for (const auto& n : endogenous_names) {
    if (n == name) return true;
  }
  for (const auto& n : exogenous_names) {
    if (n == name) return false;
  }
  throw ConfigError("StudyData: unknown column '" + name + "'");
}

double dr_ate(const std::vector<double>& y, const std::vector<double>& t,
              const std::vector<double>& e_hat,
              const std::vector<double>& m1_hat,
              const std::vector<double>& m0_hat) {
  const std::size_t n = y.size();
  if (t.size() != n || e_hat.size() != n || m1_hat.size() != n ||
      m0_hat.size() != n) {
    throw ConfigError("dr_ate: input lengths disagree");
  }
  double arm1 = 0.0, arm0 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = e_hat[i];
    if (!(e > 0.0 && e < 1.0)) {
      throw OverlapError("dr_ate: propensity at 0 or 1 violates overlap");
    }
    arm1 += t[i] * y[i] / e - (t[i] - e) / e * m1_hat[i];
    arm0 += (1.0 - t[i]) * y[i] / (1.0 - e) + (t[i] - e) / (1.0 - e) * m0_hat[i];
  }
  return (arm1 - arm0) / static_cast<double>(n);
}

AteEstimate naive_dr(const StudyData& data, const ModelSpec& spec) {
  return run_dr_pipeline(data, spec, /*with_copula=*/false);
}

FittedGlm copula_augmented_ols(const std::vector<double>& x_endo,
                               const std::vector<double>& y) {
  if (x_endo.size() < 10) {
    throw DegenerateInputError("copula_augmented_ols: need n >= 10");
  }
  if (y.size() != x_endo.size()) {
    throw ConfigError("copula_augmented_ols: input lengths disagree");
  }
  std::vector<double> c = copula_term(x_endo);
  // For (near-)normal x the copula term is a linear transform of x itself
  // and the augmented regression is unidentified. chi2(3)-grade skewness
  // gives correlation ~0.93; a normal sample gives > 0.9999.
  if (std::fabs(pearson(x_endo, c)) > 0.999) {
    throw CollinearityError(
        "copula_augmented_ols: copula term is collinear with x (the "
        "covariate looks normal; correction unidentified)",
        {"x", "copula(x)"});
  }
  const std::size_t n = x_endo.size();
  Matrix design(n, 3);
  for (std::size_t i = 0; i < n; ++i) {
    design(i, 0) = 1.0;
    design(i, 1) = x_endo[i];
    design(i, 2) = c[i];
  }
  DesignSpec spec;
  spec.names = {"(intercept)", "x", "copula(x)"};
  spec.roles = {ColumnRole::intercept, ColumnRole::endogenous,
                ColumnRole::copula};
  return ols_fit(design, spec, y);
}

AteEstimate cedr(const StudyData& data, const ModelSpec& spec, bool force) {
  data.validate();
  if (data.endogenous.cols() == 0) {
    throw ConfigError("cedr: at least one endogenous covariate is required");
  }
  if (!force) {
    bool all_weak = true;
    for (std::size_t j = 0; j < data.endogenous.cols(); ++j) {
      if (!normality_report(data.endogenous.column(j)).weak_identification) {
        all_weak = false;
        break;
      }
    }
    if (all_weak) {
      throw WeakIdentificationError(
          "cedr: every endogenous covariate passes normality (both p >= "
          "0.05); the copula correction is unidentified. Pass force to "
          "proceed anyway.");
    }
  }
  return run_dr_pipeline(data, spec, /*with_copula=*/true);
}

AteEstimate estimate_ate(const StudyData& data, const ModelSpec& spec,
                         EstimatorKind kind, bool force) {
  return kind == EstimatorKind::cedr ? cedr(data, spec, force)
                                     : naive_dr(data, spec);
}

}  // namespace cedr
