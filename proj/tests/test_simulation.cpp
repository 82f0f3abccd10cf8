#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "cedr/errors.hpp"
#include "cedr/numerics.hpp"
#include "cedr/rng.hpp"
#include "cedr/simulation.hpp"

using namespace cedr;

TEST_CASE("latent covariance matrices match the construction") {
  Matrix s1 = latent_covariance(Scenario::one, 0.3);
  REQUIRE(s1.rows() == 3);
  // (eps, Z1*, ups): eps-Z1* and Z1*-ups correlate rho; eps-ups do not.
  CHECK(s1(0, 0) == 1.0);
  CHECK(s1(0, 1) == 0.3);
  CHECK(s1(0, 2) == 0.0);
  CHECK(s1(1, 2) == 0.3);

  Matrix s2 = latent_covariance(Scenario::two, 0.5);
  REQUIRE(s2.rows() == 4);
  CHECK(s2(0, 1) == 0.5);
  CHECK(s2(0, 2) == 0.5);
  CHECK(s2(0, 3) == 0.0);
  CHECK(s2(1, 2) == 0.0);
  CHECK(s2(1, 3) == 0.5);
  CHECK(s2(2, 3) == 0.5);

  // rho = 0.75 makes the scenario-one matrix indefinite.
  CHECK_THROWS_AS(latent_covariance(Scenario::one, 0.75), DecompositionError);
}

TEST_CASE("standardized chi-squared transform") {
  // z* = 0 maps the chi2(3) median through standardization:
  // (2.3659738843753377 - 3) / sqrt(6) = -0.258858...
  std::vector<double> out = standardized_chi2_from_latent({0.0});
  CHECK(out[0] == doctest::Approx(-0.2588400778).epsilon(1e-8));

  // Monotone in the latent.
  std::vector<double> grid;
  for (double z = -4.0; z <= 4.0; z += 0.25) grid.push_back(z);
  std::vector<double> v = standardized_chi2_from_latent(grid);
  for (std::size_t i = 1; i < v.size(); ++i) CHECK(v[i] > v[i - 1]);

  // Standardization: mean ~0, sd ~1, skewness ~sqrt(8/3) over a large draw.
  const std::size_t n = 1000000;
  RngHandle rng(12);
  std::vector<double> z(n);
  for (auto& zi : z) zi = rng.normal();
  std::vector<double> x = standardized_chi2_from_latent(z);
  CHECK(mean(x) == doctest::Approx(0.0).scale(1.0).epsilon(0.01));
  CHECK(sample_sd(x) == doctest::Approx(1.0).epsilon(0.01));
  CHECK(sample_skewness(x) == doctest::Approx(std::sqrt(8.0 / 3.0)).epsilon(0.05));
}

TEST_CASE("intercept calibration hits the target share") {
  for (Scenario s : {Scenario::one, Scenario::two}) {
    for (double rho : {0.0, 0.5}) {
      DgpConfig c;
      c.scenario = s;
      c.rho = rho;
      c.n = 50000;
      RngHandle cal(1);
      c.calibrated_intercept = calibrate_intercept(c, cal);
      RngHandle rng(2);
      auto [data, tau] = generate(c, rng);
      (void)tau;
      CHECK(mean(data.t) == doctest::Approx(0.30).epsilon(0.03));
    }
  }

  // A higher target share needs a larger intercept (monotonicity).
  DgpConfig lo, hi;
  lo.scenario = hi.scenario = Scenario::one;
  lo.rho = hi.rho = 0.3;
  lo.target_treated_share = 0.2;
  hi.target_treated_share = 0.5;
  RngHandle r1(1), r2(1);
  CHECK(calibrate_intercept(lo, r1) < calibrate_intercept(hi, r2));
}

TEST_CASE("generate: shapes, determinism, and covariate laws") {
  DgpConfig c;
  c.scenario = Scenario::two;
  c.rho = 0.3;
  c.n = 20000;
  RngHandle cal(4);
  c.calibrated_intercept = calibrate_intercept(c, cal);

  RngHandle a(100), b(100), d(101);
  auto [da, taua] = generate(c, a);
  auto [db, taub] = generate(c, b);
  auto [dc, tauc] = generate(c, d);
  CHECK(taua == 2.0);
  CHECK(taub == tauc);
  CHECK(da.n() == c.n);
  CHECK(da.endogenous_names == std::vector<std::string>{"Z1", "Z4"});
  CHECK(da.exogenous_names ==
        std::vector<std::string>{"Z2", "Z3", "Z5", "Z6"});
  // Same seed reproduces the draw bit for bit; a different seed does not.
  CHECK(da.y == db.y);
  CHECK(da.t == db.t);
  CHECK(da.endogenous == db.endogenous);
  CHECK(da.y != dc.y);

  // Z1 and Z4 are standardized chi-squared(3); Z3 is Bernoulli(0.3).
  CHECK(sample_skewness(da.column("Z1")) ==
        doctest::Approx(std::sqrt(8.0 / 3.0)).epsilon(0.15));
  CHECK(sample_skewness(da.column("Z4")) ==
        doctest::Approx(std::sqrt(8.0 / 3.0)).epsilon(0.15));
  std::vector<double> z3 = da.column("Z3");
  std::set<double> z3vals(z3.begin(), z3.end());
  CHECK(z3vals == std::set<double>{0.0, 1.0});
  CHECK(mean(z3) == doctest::Approx(0.3).epsilon(0.05));

  // Missing calibration is an error.
  DgpConfig raw;
  RngHandle r(1);
  CHECK_THROWS_AS(generate(raw, r), ConfigError);
}

TEST_CASE("generate at rho = 0: regression adjustment recovers tau") {
  DgpConfig c;
  c.scenario = Scenario::one;
  c.rho = 0.0;
  c.n = 200000;
  RngHandle cal(6);
  c.calibrated_intercept = calibrate_intercept(c, cal);
  RngHandle rng(77);
  auto [data, tau] = generate(c, rng);

  // OLS of y on [1, Z1, Z2, Z3, T]; with no endogeneity the T coefficient
  // is the causal tau.
  const std::size_t n = data.n();
  Matrix x(n, 5);
  std::vector<double> z1 = data.column("Z1"), z2 = data.column("Z2"),
                      z3 = data.column("Z3");
  for (std::size_t i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = z1[i];
    x(i, 2) = z2[i];
    x(i, 3) = z3[i];
    x(i, 4) = data.t[i];
  }
  DesignSpec spec;
  spec.names = {"(intercept)", "Z1", "Z2", "Z3", "T"};
  spec.roles = {ColumnRole::intercept, ColumnRole::endogenous,
                ColumnRole::exogenous, ColumnRole::exogenous,
                ColumnRole::exogenous};
  FittedGlm fit = ols_fit(x, spec, data.y);
  CHECK(fit.coefficients[4] == doctest::Approx(tau).epsilon(0.01));
  // Outcome coefficients of the structural equation: Z1 and Z3 enter with
  // weight 1, Z2 with weight 0.
  CHECK(fit.coefficients[1] == doctest::Approx(1.0).epsilon(0.02));
  CHECK(fit.coefficients[2] == doctest::Approx(0.0).scale(1.0).epsilon(0.02));
  CHECK(fit.coefficients[3] == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("model_spec_for omits Z3 only in the wrong model") {
  ModelSpec both = model_spec_for(Scenario::one, MisspecTag::both_correct);
  CHECK(both.ps_columns == std::vector<std::string>{"Z1", "Z2", "Z3"});
  CHECK(both.outcome_columns == both.ps_columns);

  ModelSpec psw = model_spec_for(Scenario::one, MisspecTag::ps_wrong);
  CHECK(psw.ps_columns == std::vector<std::string>{"Z1", "Z2"});
  CHECK(psw.outcome_columns == std::vector<std::string>{"Z1", "Z2", "Z3"});

  ModelSpec ow = model_spec_for(Scenario::two, MisspecTag::outcome_wrong);
  CHECK(ow.ps_columns ==
        std::vector<std::string>{"Z1", "Z2", "Z3", "Z4", "Z5", "Z6"});
  CHECK(ow.outcome_columns ==
        std::vector<std::string>{"Z1", "Z2", "Z4", "Z5", "Z6"});
}

TEST_CASE("run_monte_carlo: small deterministic run") {
  DgpConfig c;
  c.scenario = Scenario::one;
  c.rho = 0.3;
  c.n = 1000;
  const std::vector<MisspecTag> mis{MisspecTag::both_correct};
  const std::vector<EstimatorKind> est{EstimatorKind::naive_dr,
                                       EstimatorKind::cedr};
  std::vector<ReplicateRecord> raw1, raw2;
  auto s1 = run_monte_carlo(c, mis, est, 30, 505, 4, &raw1);
  auto s2 = run_monte_carlo(c, mis, est, 30, 505, 1, &raw2);
  REQUIRE(s1.size() == 2);
  REQUIRE(s2.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(s1[i].bias_pct == s2[i].bias_pct);
    CHECK(s1[i].std_dev == s2[i].std_dev);
    CHECK(s1[i].replications == 30);
    CHECK(s1[i].bias_ci_low < s1[i].bias_pct);
    CHECK(s1[i].bias_pct < s1[i].bias_ci_high);
    CHECK(s1[i].std_ci_low < s1[i].std_dev);
    CHECK(s1[i].std_dev < s1[i].std_ci_high);
    CHECK_FALSE(s1[i].flagged);
  }
  // Naive is biased downward at rho = 0.3; CEDR less so.
  CHECK(s1[0].bias_pct < -3.0);
  CHECK(std::fabs(s1[1].bias_pct) < std::fabs(s1[0].bias_pct));

  // Raw records: shared datasets mean each replication index appears once
  // per cell, and records agree across thread counts.
  REQUIRE(raw1.size() == 60);
  REQUIRE(raw2.size() == 60);
  for (std::size_t i = 0; i < raw1.size(); ++i) {
    CHECK(raw1[i].replication == raw2[i].replication);
    CHECK(raw1[i].ate == raw2[i].ate);
    CHECK(raw1[i].ok);
  }
}

TEST_CASE("summary CSV schema is stable") {
  CHECK(summary_csv_header() ==
        "scenario,n,rho,misspec,estimator,replications,bias_pct,bias_ci_low,"
        "bias_ci_high,std,std_ci_low,std_ci_high");
  McSummary s;
  s.scenario = Scenario::two;
  s.n = 8000;
  s.rho = 0.5;
  s.misspec = MisspecTag::ps_wrong;
  s.estimator = EstimatorKind::cedr;
  s.replications = 1000;
  std::string row = summary_csv_row(s);
  CHECK(row.substr(0, 2) == "2,");
  CHECK(row.find("ps_wrong") != std::string::npos);
  CHECK(row.find("cedr") != std::string::npos);
  // Exactly 11 commas: the schema has 12 fields.
  CHECK(std::count(row.begin(), row.end(), ',') == 11);
}

TEST_CASE("to_string labels") {
  CHECK(to_string(Scenario::one) == "1");
  CHECK(to_string(MisspecTag::both_correct) == "both_correct");
  CHECK(to_string(MisspecTag::outcome_wrong) == "outcome_wrong");
  CHECK(to_string(EstimatorKind::naive_dr) == "naive_dr");
  CHECK(to_string(EstimatorKind::cedr) == "cedr");
}
