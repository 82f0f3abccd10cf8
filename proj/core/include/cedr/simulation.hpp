#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cedr/estimators.hpp"
#include "cedr/matrix.hpp"
#include "cedr/rng.hpp"

namespace cedr {

// Scenario one: a single endogenous covariate (Z1) among three; scenario
// two: two endogenous covariates (Z1, Z4) among six.
enum class Scenario { one = 1, two = 2 };

struct DgpConfig {
  Scenario scenario = Scenario::one;
  std::size_t n = 8000;
  double rho = 0.0;
  double tau = 2.0;  // true average treatment effect
  double target_treated_share = 0.30;
  std::optional<double> calibrated_intercept;
};

enum class MisspecTag { both_correct, ps_wrong, outcome_wrong };

std::string to_string(Scenario s);
std::string to_string(MisspecTag m);
std::string to_string(EstimatorKind k);

// Analysis models for a scenario: all observed covariates, with Z3 omitted
// from the misspecified model.
ModelSpec model_spec_for(Scenario scenario, MisspecTag misspec);

// Covariance of the latent Gaussian vector: (eps, Z1*, ups) for scenario
// one, (eps, Z1*, Z4*, ups) for scenario two. Throws DecompositionError
// (invalid rho) when the matrix is indefinite.
Matrix latent_covariance(Scenario scenario, double rho);

// Probability integral transform of a standard normal latent into a
// standardized chi-squared(3): (Q_chi2(3)(Phi(z)) - 3) / sqrt(6).
std::vector<double> standardized_chi2_from_latent(
    const std::vector<double>& z_star);

// Intercept gamma0 such that the simulated treated share over a 10^6-unit
// calibration sample is within 0.002 of the target, found by monotone
// bisection. The calibration sample is drawn from `rng`.
double calibrate_intercept(const DgpConfig& config, RngHandle& rng);

// Draw one simulated study. Requires calibrated_intercept to be set.
// Returns the data plus the true tau.
std::pair<StudyData, double> generate(const DgpConfig& config, RngHandle& rng);

// One Monte Carlo cell, mirroring a row of the results tables.
struct McSummary {
  Scenario scenario = Scenario::one;
  std::size_t n = 0;
  double rho = 0.0;
  MisspecTag misspec = MisspecTag::both_correct;
  EstimatorKind estimator = EstimatorKind::naive_dr;
  std::size_t replications = 0;  // successful replications
  double bias_pct = 0.0;
  double bias_ci_low = 0.0;
  double bias_ci_high = 0.0;
  double std_dev = 0.0;
  double std_ci_low = 0.0;
  double std_ci_high = 0.0;
  std::size_t n_failed = 0;
  bool flagged = false;  // set when more than 1% of replications failed
};

struct ReplicateRecord {
  std::size_t replication = 0;
  MisspecTag misspec = MisspecTag::both_correct;
  EstimatorKind estimator = EstimatorKind::naive_dr;
  double ate = 0.0;
  bool ok = false;
};

// Run the Monte Carlo for one (scenario, n, rho) configuration across the
// given misspecification/estimator grid. Replication r simulates one
// dataset from substream (seed, r) and feeds the identical dataset to every
// cell, so estimator contrasts are never confounded by sampling noise.
// Intercept calibration uses a fixed internal seed, so gamma0 depends only
// on (scenario, rho, target).
std::vector<McSummary> run_monte_carlo(
    DgpConfig config, const std::vector<MisspecTag>& misspecs,
    const std::vector<EstimatorKind>& estimators, std::size_t replications,
    std::uint64_t seed, int threads = 1,
    std::vector<ReplicateRecord>* raw = nullptr);

// Stable CSV schema for summaries (header + one row per cell).
std::string summary_csv_header();
std::string summary_csv_row(const McSummary& s);

}  // namespace cedr
