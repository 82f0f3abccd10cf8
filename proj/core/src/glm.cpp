#include "cedr/glm.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "cedr/errors.hpp"
#include "cedr/numerics.hpp"

namespace cedr {

namespace {

Eigen::MatrixXd to_eigen(const Matrix& m) {
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = m(i, j);
  return out;
}

void check_shapes(const Matrix& design, const DesignSpec& spec,
                  const std::vector<double>& y, const char* what) {
  spec.validate();
  if (design.cols() != spec.size()) {
    throw DesignMismatchError(std::string(what) +
                              ": design columns do not match spec");
  }
  if (design.rows() != y.size()) {
    throw DesignMismatchError(std::string(what) +
                              ": response length does not match design rows");
  }
  if (design.rows() <= design.cols()) {
    throw DegenerateInputError(std::string(what) +
                               ": need more rows than columns");
  }
}

// Rank-revealing QR solve; throws CollinearityError naming the columns the
// pivoting identified as dependent on the preceding ones.
Eigen::VectorXd qr_solve(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         const DesignSpec& spec, const char* what) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-10);
  const auto rank = qr.rank();
  if (rank < X.cols()) {
    std::vector<std::string> dependent;
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index k = rank; k < X.cols(); ++k) {
      dependent.push_back(spec.names[static_cast<std::size_t>(perm(k))]);
    }
    std::string msg = std::string(what) + ": design is rank-deficient;"
                      " dependent columns:";
    for (const auto& name : dependent) msg += " " + name;
    throw CollinearityError(msg, dependent);
  }
  return qr.solve(y);
}

double probit_loglik(const Eigen::MatrixXd& X, const Eigen::VectorXd& t,
                     const Eigen::VectorXd& b) {
  Eigen::VectorXd xb = X * b;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < xb.size(); ++i) {
    ll += t(i) > 0.5 ? std_normal_logcdf(xb(i)) : std_normal_logcdf(-xb(i));
  }
  return ll;
}

}  // namespace

void DesignSpec::validate() const {
  if (names.size() != roles.size()) {
    throw ConfigError("DesignSpec: names and roles differ in length");
  }
  if (names.empty()) {
    throw ConfigError("DesignSpec: empty design");
  }
  std::size_t intercepts = 0;
  for (ColumnRole r : roles) {
    if (r == ColumnRole::intercept) ++intercepts;
  }
  if (intercepts != 1) {
    throw ConfigError("DesignSpec: expected exactly one intercept column");
  }
}

FittedGlm ols_fit(const Matrix& design, const DesignSpec& spec,
                  const std::vector<double>& y) {
  check_shapes(design, spec, y, "ols_fit");
  Eigen::MatrixXd X = to_eigen(design);
  Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(
      y.data(), static_cast<Eigen::Index>(y.size()));
  Eigen::VectorXd b = qr_solve(X, yv, spec, "ols_fit");
  const double rss = (yv - X * b).squaredNorm();
  FittedGlm fit;
  fit.family = GlmFamily::ols;
  fit.spec = spec;
  fit.coefficients.assign(b.data(), b.data() + b.size());
  fit.residual_variance =
      rss / static_cast<double>(design.rows() - design.cols());
  fit.converged = true;
  fit.iterations = 0;
  return fit;
}

FittedGlm probit_fit(const Matrix& design, const DesignSpec& spec,
                     const std::vector<double>& t) {
  check_shapes(design, spec, t, "probit_fit");
  bool any0 = false, any1 = false;
  for (double v : t) {
    if (v == 0.0) {
      any0 = true;
    } else if (v == 1.0) {
      any1 = true;
    } else {
      throw DomainError("probit_fit: response must be 0/1");
    }
  }
  if (!any0 || !any1) {
    throw DegenerateInputError("probit_fit: both classes must be present");
  }

  Eigen::MatrixXd X = to_eigen(design);
  Eigen::VectorXd tv = Eigen::Map<const Eigen::VectorXd>(
      t.data(), static_cast<Eigen::Index>(t.size()));
  // Linear-probability OLS start; also surfaces collinearity early.
  Eigen::VectorXd b = qr_solve(X, tv, spec, "probit_fit");

  const int max_iter = 100;
  double ll = probit_loglik(X, tv, b);
  double grad_norm = 0.0;
  bool converged = false;
  int iter = 0;
  const Eigen::Index n = X.rows();
  Eigen::VectorXd lambda(n), w(n);
  for (iter = 1; iter <= max_iter; ++iter) {
    Eigen::VectorXd xb = X * b;
    // Score residual: lambda_i = phi/Phi for treated, -phi/(1-Phi) otherwise.
    for (Eigen::Index i = 0; i < n; ++i) {
      lambda(i) = tv(i) > 0.5 ? inverse_mills(xb(i)) : -inverse_mills(-xb(i));
      w(i) = lambda(i) * (lambda(i) + xb(i));  // exact -Hessian weight
    }
    Eigen::VectorXd grad = X.transpose() * lambda;
    grad_norm = grad.lpNorm<Eigen::Infinity>();
    if (grad_norm <= 1e-8) {
      converged = true;
      break;
    }
    Eigen::MatrixXd H = X.transpose() * w.asDiagonal() * X;
    Eigen::VectorXd step = H.ldlt().solve(grad);
    // Step-halving: never accept an iterate that lowers the log-likelihood.
    double scale = 1.0;
    Eigen::VectorXd cand;
    double ll_new = ll;
    // Tolerance is relative to |ll|: near the optimum the true improvement
    // sinks below the rounding noise of a sum of n log terms.
    const double ascent_tol = 1e-10 * (1.0 + std::fabs(ll));
    for (int h = 0; h < 40; ++h) {
      cand = b + scale * step;
      ll_new = probit_loglik(X, tv, cand);
      if (ll_new >= ll - ascent_tol) break;
      scale *= 0.5;
    }
    b = cand;
    ll = ll_new;
    if (b.lpNorm<Eigen::Infinity>() > 50.0) {
      throw SeparationError(
          "probit_fit: coefficients diverging (|coef| > 50); "
          "data are (quasi-)separated");
    }
  }
  if (!converged) {
    throw ConvergenceError("probit_fit: no convergence after 100 iterations"
                           " (gradient inf-norm " + std::to_string(grad_norm) +
                           ")",
                           grad_norm);
  }

  FittedGlm fit;
  fit.family = GlmFamily::probit;
  fit.spec = spec;
  fit.coefficients.assign(b.data(), b.data() + b.size());
  fit.converged = true;
  fit.iterations = iter;
  fit.log_likelihood = ll;
  return fit;
}

std::vector<double> glm_predict(const FittedGlm& fit, const Matrix& design,
                                const std::set<ColumnRole>& drop_roles) {
  std::vector<std::size_t> kept;
  for (std::size_t j = 0; j < fit.spec.size(); ++j) {
    if (!drop_roles.count(fit.spec.roles[j])) kept.push_back(j);
  }
  if (design.cols() != kept.size()) {
    throw DesignMismatchError(
        "glm_predict: design has " + std::to_string(design.cols()) +
        " columns, expected " + std::to_string(kept.size()) +
        " after dropping roles");
  }
  std::vector<double> out(design.rows(), 0.0);
  for (std::size_t i = 0; i < design.rows(); ++i) {
    double idx = 0.0;
    for (std::size_t c = 0; c < kept.size(); ++c) {
      idx += fit.coefficients[kept[c]] * design(i, c);
    }
    out[i] = fit.family == GlmFamily::probit ? std_normal_cdf(idx) : idx;
  }
  return out;
}

}  // namespace cedr
