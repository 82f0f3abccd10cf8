#include "cedr/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "cedr/errors.hpp"
#include "cedr/numerics.hpp"

namespace cedr {

namespace {

constexpr double kSqrt6 = 2.449489742783178;
// Calibration always uses this seed so gamma0 is a pure function of
// (scenario, rho, target) and identical across runs and machines.
constexpr std::uint64_t kCalibrationSeed = 0x0CA11B8A7E5EEDULL;
constexpr std::size_t kCalibrationSampleSize = 1000000;

struct LatentDraw {
  std::vector<double> eps;
  std::vector<double> ups;
  std::vector<double> index;    // treatment-equation index without intercept
  std::vector<double> outcome;  // outcome-equation covariate part
  Matrix exogenous;
  Matrix endogenous;
  std::vector<std::string> exo_names;
  std::vector<std::string> endo_names;
};

// Draw all structural pieces of one simulated study (everything except the
// realized T and Y, which need the calibrated intercept).
LatentDraw draw_structural(const DgpConfig& config, std::size_t n,
                           RngHandle& rng) {
  const Matrix L = cholesky(latent_covariance(config.scenario, config.rho));
  const Matrix lat = mvn_sample(L, n, rng);

  LatentDraw d;
  d.eps.resize(n);
  d.ups.resize(n);
  d.index.resize(n);
  d.outcome.resize(n);
  const std::size_t dlat = L.rows();
  std::vector<double> z1_star(n);
  for (std::size_t i = 0; i < n; ++i) {
    d.eps[i] = lat(i, 0);
    d.ups[i] = lat(i, dlat - 1);
    z1_star[i] = lat(i, 1);
  }
  std::vector<double> z1 = standardized_chi2_from_latent(z1_star);

  if (config.scenario == Scenario::one) {
    std::vector<double> z2(n), z3(n);
    for (std::size_t i = 0; i < n; ++i) z2[i] = rng.normal();
    for (std::size_t i = 0; i < n; ++i) z3[i] = rng.bernoulli(0.3);
    for (std::size_t i = 0; i < n; ++i) {
      d.index[i] = z1[i] - z2[i] + z3[i];
      d.outcome[i] = z1[i] + z3[i];
    }
    d.endogenous = Matrix(n, 1);
    d.endogenous.set_column(0, z1);
    d.endo_names = {"Z1"};
    d.exogenous = Matrix(n, 2);
    d.exogenous.set_column(0, z2);
    d.exogenous.set_column(1, z3);
    d.exo_names = {"Z2", "Z3"};
  } else {
    std::vector<double> z4_star(n);
    for (std::size_t i = 0; i < n; ++i) z4_star[i] = lat(i, 2);
    std::vector<double> z4 = standardized_chi2_from_latent(z4_star);
    std::vector<double> z2(n), z5(n), z6(n), z3(n);
    for (std::size_t i = 0; i < n; ++i) z2[i] = rng.normal();
    for (std::size_t i = 0; i < n; ++i) z5[i] = rng.normal();
    for (std::size_t i = 0; i < n; ++i) z6[i] = rng.normal();
    for (std::size_t i = 0; i < n; ++i) z3[i] = rng.bernoulli(0.3);
    for (std::size_t i = 0; i < n; ++i) {
      d.index[i] = z1[i] - 2.0 * z2[i] + z3[i] + z4[i] - 2.0 * z5[i] + z6[i];
      d.outcome[i] = z1[i] + z3[i] + z4[i] + z6[i];
    }
    d.endogenous = Matrix(n, 2);
    d.endogenous.set_column(0, z1);
    d.endogenous.set_column(1, z4);
    d.endo_names = {"Z1", "Z4"};
    d.exogenous = Matrix(n, 4);
    d.exogenous.set_column(0, z2);
    d.exogenous.set_column(1, z3);
    d.exogenous.set_column(2, z5);
    d.exogenous.set_column(3, z6);
    d.exo_names = {"Z2", "Z3", "Z5", "Z6"};
  }
  return d;
}

}  // namespace

std::string to_string(Scenario s) {
  return s == Scenario::one ? "1" : "2";
}

std::string to_string(MisspecTag m) {
  switch (m) {
    case MisspecTag::both_correct:
      return "both_correct";
    case MisspecTag::ps_wrong:
      return "ps_wrong";
    default:
      return "outcome_wrong";
  }
}

std::string to_string(EstimatorKind k) {
  return k == EstimatorKind::cedr ? "cedr" : "naive_dr";
}

ModelSpec model_spec_for(Scenario scenario, MisspecTag misspec) {
  std::vector<std::string> all =
      scenario == Scenario::one
          ? std::vector<std::string>{"Z1", "Z2", "Z3"}
          : std::vector<std::string>{"Z1", "Z2", "Z3", "Z4", "Z5", "Z6"};
  std::vector<std::string> wrong;
  for (const auto& c : all) {
    if (c != "Z3") wrong.push_back(c);  // the misspecified model omits Z3
  }
  ModelSpec spec;
  spec.ps_columns = misspec == MisspecTag::ps_wrong ? wrong : all;
  spec.outcome_columns = misspec == MisspecTag::outcome_wrong ? wrong : all;
  return spec;
}

Matrix latent_covariance(Scenario scenario, double rho) {
  if (!(rho >= 0.0 && rho < 1.0)) {
    throw DomainError("latent_covariance: rho must lie in [0, 1)");
  }
  Matrix s;
  if (scenario == Scenario::one) {
    s = Matrix::identity(3);
    s(0, 1) = s(1, 0) = rho;  // corr(eps, Z1*)
    s(1, 2) = s(2, 1) = rho;  // corr(Z1*, ups)
  } else {
    s = Matrix::identity(4);
    s(0, 1) = s(1, 0) = rho;  // corr(eps, Z1*)
    s(0, 2) = s(2, 0) = rho;  // corr(eps, Z4*)
    s(1, 3) = s(3, 1) = rho;  // corr(Z1*, ups)
    s(2, 3) = s(3, 2) = rho;  // corr(Z4*, ups)
  }
  cholesky(s);  // raises DecompositionError for an invalid rho
  return s;
}

std::vector<double> standardized_chi2_from_latent(
    const std::vector<double>& z_star) {
  std::vector<double> out(z_star.size());
  for (std::size_t i = 0; i < z_star.size(); ++i) {
    if (!std::isfinite(z_star[i])) {
      throw DomainError("standardized_chi2_from_latent: non-finite input");
    }
    out[i] = (chi2_quantile(std_normal_cdf(z_star[i]), 3.0) - 3.0) / kSqrt6;
  }
  return out;
}

double calibrate_intercept(const DgpConfig& config, RngHandle& rng) {
  const double target = config.target_treated_share;
  if (!(target > 0.0 && target < 1.0)) {
    throw CalibrationError("calibrate_intercept: target share outside (0,1)");
  }
  LatentDraw d = draw_structural(config, kCalibrationSampleSize, rng);
  // Treated share as a function of gamma0: monotone nondecreasing, so plain
  // bisection on the simulated share converges.
  std::vector<double> s(kCalibrationSampleSize);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = d.index[i] + d.ups[i];
  auto share = [&](double gamma0) {
    std::size_t treated = 0;
    for (double v : s) {
      if (gamma0 + v > 0.0) ++treated;
    }
    return static_cast<double>(treated) / static_cast<double>(s.size());
  };
  double lo = -50.0, hi = 50.0;
  if (share(lo) > target || share(hi) < target) {
    throw CalibrationError("calibrate_intercept: target share not bracketed");
  }
  double mid = 0.0;
  for (int it = 0; it < 200; ++it) {
    mid = 0.5 * (lo + hi);
    const double sh = share(mid);
    if (std::fabs(sh - target) <= 0.002 || hi - lo < 1e-12) break;
    (sh < target ? lo : hi) = mid;
  }
  return mid;
}

std::pair<StudyData, double> generate(const DgpConfig& config, RngHandle& rng) {
  if (!config.calibrated_intercept.has_value()) {
    throw ConfigError("generate: calibrated_intercept must be set");
  }
  const double gamma0 = *config.calibrated_intercept;
  LatentDraw d = draw_structural(config, config.n, rng);

  StudyData data;
  data.exogenous = std::move(d.exogenous);
  data.endogenous = std::move(d.endogenous);
  data.exogenous_names = std::move(d.exo_names);
  data.endogenous_names = std::move(d.endo_names);
  data.y.resize(config.n);
  data.t.resize(config.n);
  for (std::size_t i = 0; i < config.n; ++i) {
    // ups is the treatment-equation error; its latent correlation with Z1*
    // (and Z4*) is what transmits endogeneity into treatment assignment.
    data.t[i] = gamma0 + d.index[i] + d.ups[i] > 0.0 ? 1.0 : 0.0;
    data.y[i] = d.outcome[i] + config.tau * data.t[i] + d.eps[i];
  }
  return {std::move(data), config.tau};
}

std::vector<McSummary> run_monte_carlo(
    DgpConfig config, const std::vector<MisspecTag>& misspecs,
    const std::vector<EstimatorKind>& estimators, std::size_t replications,
    std::uint64_t seed, int threads, std::vector<ReplicateRecord>* raw) {
  if (replications < 2) {
    throw ConfigError("run_monte_carlo: need at least 2 replications");
  }
  if (misspecs.empty() || estimators.empty()) {
    throw ConfigError("run_monte_carlo: empty misspecification/estimator grid");
  }
  if (!config.calibrated_intercept.has_value()) {
    RngHandle cal_rng(kCalibrationSeed);
    config.calibrated_intercept = calibrate_intercept(config, cal_rng);
  }

  struct Cell {
    MisspecTag misspec;
    EstimatorKind estimator;
    ModelSpec spec;
  };
  std::vector<Cell> cells;
  for (MisspecTag m : misspecs) {
    for (EstimatorKind e : estimators) {
      cells.push_back({m, e, model_spec_for(config.scenario, m)});
    }
  }

  const std::size_t n_cells = cells.size();
  std::vector<double> ates(replications * n_cells, 0.0);
  std::vector<char> ok(replications * n_cells, 0);

  RngHandle root(seed);
  const int n_threads =
      std::max(1, std::min<int>(threads, static_cast<int>(replications)));
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t r = next.fetch_add(1);
      if (r >= replications) return;
      RngHandle rng = root.substream(r);
      // One dataset per replication, shared across every cell.
      auto [data, tau] = generate(config, rng);
      (void)tau;
      for (std::size_t c = 0; c < n_cells; ++c) {
        try {
          // The DGP's endogenous covariates are chi-squared by construction,
          // so identification holds; force skips the per-replication gate.
          ates[r * n_cells + c] =
              estimate_ate(data, cells[c].spec, cells[c].estimator,
                           /*force=*/true)
                  .ate;
          ok[r * n_cells + c] = 1;
        } catch (const Error&) {
          ok[r * n_cells + c] = 0;
        }
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

  if (raw) {
    for (std::size_t r = 0; r < replications; ++r) {
      for (std::size_t c = 0; c < n_cells; ++c) {
        raw->push_back({r, cells[c].misspec, cells[c].estimator,
                        ates[r * n_cells + c],
                        static_cast<bool>(ok[r * n_cells + c])});
      }
    }
  }

  std::vector<McSummary> out;
  for (std::size_t c = 0; c < n_cells; ++c) {
    std::vector<double> tau_hat;
    std::size_t failed = 0;
    for (std::size_t r = 0; r < replications; ++r) {
      if (ok[r * n_cells + c]) {
        tau_hat.push_back(ates[r * n_cells + c]);
      } else {
        ++failed;
      }
    }
    if (tau_hat.size() < 2) {
      throw InferenceUnreliableError(
          "run_monte_carlo: almost every replication failed in a cell",
          failed, replications);
    }
    McSummary s;
    s.scenario = config.scenario;
    s.n = config.n;
    s.rho = config.rho;
    s.misspec = cells[c].misspec;
    s.estimator = cells[c].estimator;
    s.replications = tau_hat.size();
    s.n_failed = failed;
    s.flagged = failed * 100 > replications;

    const double r_ok = static_cast<double>(tau_hat.size());
    const double m = mean(tau_hat);
    const double sd = sample_sd(tau_hat);
    s.bias_pct = 100.0 * (m - config.tau) / config.tau;
    const double half = 1.96 * sd * 100.0 / (config.tau * std::sqrt(r_ok));
    s.bias_ci_low = s.bias_pct - half;
    s.bias_ci_high = s.bias_pct + half;
    s.std_dev = sd;
    // Chi-squared interval for the Monte Carlo standard deviation.
    const double df = r_ok - 1.0;
    s.std_ci_low = sd * std::sqrt(df / chi2_quantile(0.975, df));
    s.std_ci_high = sd * std::sqrt(df / chi2_quantile(0.025, df));
    out.push_back(s);
  }
  return out;
}

std::string summary_csv_header() {
  return "scenario,n,rho,misspec,estimator,replications,bias_pct,"
         "bias_ci_low,bias_ci_high,std,std_ci_low,std_ci_high";
}

std::string summary_csv_row(const McSummary& s) {
  std::ostringstream os;
  os.precision(10);
  os << to_string(s.scenario) << ',' << s.n << ',' << s.rho << ','
     << to_string(s.misspec) << ',' << to_string(s.estimator) << ','
     << s.replications << ',' << s.bias_pct << ',' << s.bias_ci_low << ','
     << s.bias_ci_high << ',' << s.std_dev << ',' << s.std_ci_low << ','
     << s.std_ci_high;
  return os.str();
}

}  // namespace cedr
