// cedr: simulation sweeps, real-data estimation, and diagnostics for the
// copula-corrected doubly robust ATE estimator.
//
// Exit codes: 0 success, 2 usage error, 3 data/config error, 4 numeric
// failure, 5 advisory (diagnostics warn).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cedr/dataio.hpp"
#include "cedr/errors.hpp"
#include "cedr/estimators.hpp"
#include "cedr/inference.hpp"
#include "cedr/numerics.hpp"
#include "cedr/rng.hpp"
#include "cedr/simulation.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "1.0.0";
constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;
constexpr int kExitAdvisory = 5;

int resolve_threads(int flag_value) {
  if (flag_value > 0) return flag_value;
  if (const char* env = std::getenv("CEDR_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

std::string timestamp_utc() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(const fs::path& out_dir, const std::string& subcommand,
                    const json& parameters, std::uint64_t seed,
                    const std::vector<std::string>& outputs) {
  json m;
  m["subcommand"] = subcommand;
  m["parameters"] = parameters;
  m["seed"] = seed;
  m["tool_version"] = kVersion;
  m["timestamp"] = timestamp_utc();
  m["outputs"] = outputs;
  std::ofstream f(out_dir / "manifest.json");
  f << m.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// SVG bar chart: bias% grouped by misspec x estimator, one group block per
// rho. Hand-rolled: plain rectangles, axis, and labels.
// ---------------------------------------------------------------------------

std::string bias_chart_svg(const std::vector<cedr::McSummary>& cells) {
  // Collect the grid in first-appearance order.
  std::vector<double> rhos;
  std::vector<cedr::MisspecTag> misspecs;
  std::vector<cedr::EstimatorKind> estimators;
  for (const auto& c : cells) {
    if (std::find(rhos.begin(), rhos.end(), c.rho) == rhos.end())
      rhos.push_back(c.rho);
    if (std::find(misspecs.begin(), misspecs.end(), c.misspec) ==
        misspecs.end())
      misspecs.push_back(c.misspec);
    if (std::find(estimators.begin(), estimators.end(), c.estimator) ==
        estimators.end())
      estimators.push_back(c.estimator);
  }
  double lim = 5.0;
  for (const auto& c : cells) lim = std::max(lim, std::fabs(c.bias_pct));
  lim *= 1.1;

  const double bar_w = 18.0, gap = 6.0, group_gap = 28.0;
  const double plot_h = 260.0, top = 40.0, left = 70.0;
  const double group_w =
      misspecs.size() * (estimators.size() * bar_w + gap) + group_gap;
  const double width = left + rhos.size() * group_w + 40.0;
  const double height = top + plot_h + 80.0;
  const double zero_y = top + plot_h / 2.0;
  const double scale = (plot_h / 2.0) / lim;
  const char* colors[] = {"#4878a8", "#d1605e", "#6aa56e", "#b8860b"};

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
    << "\" height=\"" << height << "\" font-family=\"sans-serif\">\n";
  s << "<text x=\"" << width / 2.0
    << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
       "Bias (%) by endogeneity level and misspecification</text>\n";
  // Axis line and zero line.
  s << "<line x1=\"" << left - 8 << "\" y1=\"" << zero_y << "\" x2=\""
    << width - 20 << "\" y2=\"" << zero_y
    << "\" stroke=\"#333\" stroke-width=\"1\"/>\n";
  for (int tick = -2; tick <= 2; ++tick) {
    const double v = lim * tick / 2.0;
    const double y = zero_y - v * scale;
    s << "<text x=\"" << left - 12 << "\" y=\"" << y + 4
      << "\" text-anchor=\"end\" font-size=\"10\">" << std::fixed
      << std::setprecision(1) << v << "</text>\n";
  }
  for (std::size_t ri = 0; ri < rhos.size(); ++ri) {
    const double gx = left + ri * group_w;
    s << "<text x=\"" << gx + (group_w - group_gap) / 2.0 << "\" y=\""
      << top + plot_h + 44
      << "\" text-anchor=\"middle\" font-size=\"12\">rho = " << rhos[ri]
      << "</text>\n";
    for (std::size_t mi = 0; mi < misspecs.size(); ++mi) {
      const double mx = gx + mi * (estimators.size() * bar_w + gap);
      s << "<text x=\"" << mx + estimators.size() * bar_w / 2.0 << "\" y=\""
        << top + plot_h + 26
        << "\" text-anchor=\"middle\" font-size=\"8\">"
        << cedr::to_string(misspecs[mi]) << "</text>\n";
      for (std::size_t ei = 0; ei < estimators.size(); ++ei) {
        for (const auto& c : cells) {
          if (c.rho != rhos[ri] || c.misspec != misspecs[mi] ||
              c.estimator != estimators[ei])
            continue;
          const double h = std::fabs(c.bias_pct) * scale;
          const double y = c.bias_pct >= 0 ? zero_y - h : zero_y;
          s << "<rect x=\"" << mx + ei * bar_w << "\" y=\"" << y
            << "\" width=\"" << bar_w - 2 << "\" height=\"" << h
            << "\" fill=\"" << colors[ei % 4] << "\"/>\n";
        }
      }
    }
  }
  // Legend.
  for (std::size_t ei = 0; ei < estimators.size(); ++ei) {
    const double y = top + ei * 16.0;
    s << "<rect x=\"" << width - 110 << "\" y=\"" << y
      << "\" width=\"12\" height=\"12\" fill=\"" << colors[ei % 4]
      << "\"/>\n";
    s << "<text x=\"" << width - 94 << "\" y=\"" << y + 10
      << "\" font-size=\"10\">" << cedr::to_string(estimators[ei])
      << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateArgs {
  int scenario = 1;
  std::vector<std::size_t> ns;
  std::vector<double> rhos;
  std::size_t reps = 1000;
  std::uint64_t seed = 42;
  std::string estimators = "both";
  std::string misspec = "all";
  std::string out = ".";
  bool raw = false;
  int threads = 0;
};

int cmd_simulate(const SimulateArgs& a) {
  const cedr::Scenario scenario =
      a.scenario == 1 ? cedr::Scenario::one : cedr::Scenario::two;
  std::vector<std::size_t> ns = a.ns.empty() ? std::vector<std::size_t>{8000}
                                             : a.ns;
  std::vector<double> rhos = a.rhos.empty() ? std::vector<double>{0.0} : a.rhos;

  // Validate every rho up front so a sweep never dies halfway through.
  for (double rho : rhos) {
    try {
      cedr::latent_covariance(scenario, rho);
    } catch (const cedr::Error&) {
      std::cerr << "error: invalid rho " << rho << " for scenario "
                << a.scenario
                << " (latent covariance is not positive semidefinite)\n";
      return kExitNumeric;
    }
  }

  std::vector<cedr::MisspecTag> misspecs;
  if (a.misspec == "all") {
    misspecs = {cedr::MisspecTag::both_correct, cedr::MisspecTag::ps_wrong,
                cedr::MisspecTag::outcome_wrong};
  } else if (a.misspec == "both_correct") {
    misspecs = {cedr::MisspecTag::both_correct};
  } else if (a.misspec == "ps_wrong") {
    misspecs = {cedr::MisspecTag::ps_wrong};
  } else if (a.misspec == "outcome_wrong") {
    misspecs = {cedr::MisspecTag::outcome_wrong};
  } else {
    std::cerr << "error: unknown --misspec '" << a.misspec << "'\n";
    return kExitUsage;
  }
  std::vector<cedr::EstimatorKind> estimators;
  if (a.estimators == "both") {
    estimators = {cedr::EstimatorKind::naive_dr, cedr::EstimatorKind::cedr};
  } else if (a.estimators == "naive") {
    estimators = {cedr::EstimatorKind::naive_dr};
  } else if (a.estimators == "cedr") {
    estimators = {cedr::EstimatorKind::cedr};
  } else {
    std::cerr << "error: unknown --estimators '" << a.estimators << "'\n";
    return kExitUsage;
  }

  const int threads = resolve_threads(a.threads);
  const fs::path out_dir(a.out);
  fs::create_directories(out_dir);

  std::vector<cedr::McSummary> all;
  std::vector<cedr::ReplicateRecord> all_raw;
  std::ostringstream raw_csv;
  raw_csv << "scenario,n,rho,replication,misspec,estimator,ate,ok\n";
  for (std::size_t n : ns) {
    for (double rho : rhos) {
      cedr::DgpConfig config;
      config.scenario = scenario;
      config.n = n;
      config.rho = rho;
      std::vector<cedr::ReplicateRecord> raw_records;
      std::vector<cedr::McSummary> cells = cedr::run_monte_carlo(
          config, misspecs, estimators, a.reps, a.seed, threads,
          a.raw ? &raw_records : nullptr);
      for (const auto& c : cells) all.push_back(c);
      for (const auto& r : raw_records) {
        raw_csv << a.scenario << ',' << n << ',' << rho << ','
                << r.replication << ',' << cedr::to_string(r.misspec) << ','
                << cedr::to_string(r.estimator) << ',' << r.ate << ','
                << (r.ok ? 1 : 0) << '\n';
      }
      std::cerr << "finished scenario " << a.scenario << " n=" << n
                << " rho=" << rho << " (" << cells.size() << " cells)\n";
    }
  }

  std::vector<std::string> outputs;
  {
    std::ofstream f(out_dir / "summary.csv");
    f << cedr::summary_csv_header() << '\n';
    for (const auto& c : all) f << cedr::summary_csv_row(c) << '\n';
    outputs.push_back("summary.csv");
  }
  if (a.raw) {
    std::ofstream f(out_dir / "raw.csv");
    f << raw_csv.str();
    outputs.push_back("raw.csv");
  }
  {
    std::ofstream f(out_dir / "bias_chart.svg");
    f << bias_chart_svg(all);
    outputs.push_back("bias_chart.svg");
  }

  json params;
  params["scenario"] = a.scenario;
  params["n"] = ns;
  params["rho"] = rhos;
  params["reps"] = a.reps;
  params["estimators"] = a.estimators;
  params["misspec"] = a.misspec;
  params["raw"] = a.raw;
  params["threads"] = threads;
  write_manifest(out_dir, "simulate", params, a.seed, outputs);

  for (const auto& c : all) {
    if (c.flagged) {
      std::cerr << "warning: cell " << cedr::to_string(c.misspec) << "/"
                << cedr::to_string(c.estimator) << " at rho=" << c.rho
                << " had " << c.n_failed << " failed replications\n";
    }
  }
  std::cout << "wrote " << all.size() << " summary rows to "
            << (out_dir / "summary.csv").string() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------
// estimate
// ---------------------------------------------------------------------------

struct EstimateArgs {
  std::string data;
  std::string config;
  std::string estimator = "both";
  std::size_t bootstrap = 0;  // 0: use the config's value
  std::uint64_t seed = 42;
  std::string out = ".";
  bool force = false;
  int threads = 0;
};

int cmd_estimate(const EstimateArgs& a) {
  const cedr::StudyConfig cfg = cedr::load_study_config(a.config);
  cedr::LoadReport load_rep;
  const cedr::StudyData data = cedr::load_study(a.data, cfg, &load_rep);
  const std::size_t B =
      a.bootstrap > 0 ? a.bootstrap : cfg.bootstrap_replications;
  const int threads = resolve_threads(a.threads);

  std::vector<cedr::EstimatorKind> kinds;
  if (a.estimator == "both") {
    kinds = {cedr::EstimatorKind::naive_dr, cedr::EstimatorKind::cedr};
  } else if (a.estimator == "naive") {
    kinds = {cedr::EstimatorKind::naive_dr};
  } else if (a.estimator == "cedr") {
    kinds = {cedr::EstimatorKind::cedr};
  } else {
    std::cerr << "error: unknown --estimator '" << a.estimator << "'\n";
    return kExitUsage;
  }

  // The weak-identification gate applies to the CEDR path; --force overrides.
  const bool wants_cedr =
      std::find(kinds.begin(), kinds.end(), cedr::EstimatorKind::cedr) !=
      kinds.end();
  if (wants_cedr && !a.force) {
    const cedr::PrecheckReport pre = cedr::precheck_study(data);
    if (pre.weak_identification) {
      std::cerr << "error: weak identification; every endogenous covariate "
                   "passes both normality tests.\n"
                << pre.to_text()
                << "Rerun with --force to proceed anyway.\n";
      return kExitNumeric;
    }
  }

  cedr::ModelSpec spec;
  spec.ps_columns = cfg.exogenous;
  spec.ps_columns.insert(spec.ps_columns.end(), cfg.endogenous.begin(),
                         cfg.endogenous.end());
  spec.outcome_columns = spec.ps_columns;

  const fs::path out_dir(a.out);
  fs::create_directories(out_dir);

  std::ostringstream csv, text;
  csv << "estimator,ate,ci_low,ci_high,se,n,bootstrap_replications,"
         "failed_replicates,min_propensity,max_propensity\n";
  text << "Estimator   ATE        95% CI                SE         n\n";
  for (cedr::EstimatorKind kind : kinds) {
    const cedr::BootstrapResult boot =
        cedr::bootstrap_estimate(data, spec, kind, B, a.seed, threads);
    const cedr::AteEstimate diag =
        cedr::estimate_ate(data, spec, kind, /*force=*/true);
    csv << cedr::to_string(kind) << ',' << boot.point << ',' << boot.ci_low
        << ',' << boot.ci_high << ',' << boot.se << ',' << data.n() << ','
        << B << ',' << boot.n_failed << ',' << diag.min_propensity << ','
        << diag.max_propensity << '\n';
    std::ostringstream ci;
    ci << "[" << std::fixed << std::setprecision(4) << boot.ci_low << ", "
       << boot.ci_high << "]";
    text << std::left << std::setw(12) << cedr::to_string(kind)
         << std::setw(11) << std::fixed << std::setprecision(4) << boot.point
         << std::setw(22) << ci.str() << std::setw(11) << boot.se << data.n()
         << '\n';
  }
  {
    std::ofstream f(out_dir / "estimates.csv");
    f << csv.str();
  }
  std::cout << text.str();
  if (load_rep.n_dropped > 0) {
    std::cout << "(dropped " << load_rep.n_dropped << " of "
              << load_rep.n_rows << " rows with missing values)\n";
  }

  json params;
  params["data"] = a.data;
  params["config"] = a.config;
  params["estimator"] = a.estimator;
  params["bootstrap"] = B;
  params["force"] = a.force;
  params["threads"] = threads;
  write_manifest(out_dir, "estimate", params, a.seed, {"estimates.csv"});
  return kExitOk;
}

// ---------------------------------------------------------------------------
// diagnose
// ---------------------------------------------------------------------------

struct DiagnoseArgs {
  std::string data;
  std::string config;
  std::string out = ".";
};

int cmd_diagnose(const DiagnoseArgs& a) {
  const cedr::StudyConfig cfg = cedr::load_study_config(a.config);
  const cedr::StudyData data = cedr::load_study(a.data, cfg);
  const cedr::PrecheckReport report = cedr::precheck_study(data);

  const fs::path out_dir(a.out);
  fs::create_directories(out_dir);
  std::vector<std::string> outputs{"precheck.json"};
  {
    std::ofstream f(out_dir / "precheck.json");
    f << report.to_json() << '\n';
  }
  std::cout << report.to_text();

  // Per endogenous covariate: histogram bins and normal Q-Q pairs for
  // external plotting.
  for (std::size_t j = 0; j < data.endogenous.cols(); ++j) {
    const std::string& name = data.endogenous_names[j];
    std::vector<double> x = data.endogenous.column(j);
    std::sort(x.begin(), x.end());
    const std::size_t n = x.size();

    const int bins = 30;
    const double lo = x.front(), hi = x.back();
    const double w = (hi - lo) / bins;
    std::vector<std::size_t> counts(bins, 0);
    for (double v : x) {
      int b = w > 0 ? static_cast<int>((v - lo) / w) : 0;
      counts[std::clamp(b, 0, bins - 1)]++;
    }
    {
      std::ofstream f(out_dir / ("hist_" + name + ".csv"));
      f << "bin_low,bin_high,count\n";
      for (int b = 0; b < bins; ++b) {
        f << lo + b * w << ',' << lo + (b + 1) * w << ',' << counts[b] << '\n';
      }
      outputs.push_back("hist_" + name + ".csv");
    }
    {
      // One pair per observation: sample quantile vs the normal quantile
      // (same mean/sd) at plotting position (i + 0.5)/n.
      const double mu = cedr::mean(x), sd = cedr::sample_sd(x);
      std::ofstream f(out_dir / ("qq_" + name + ".csv"));
      f << "theoretical,sample\n";
      f.precision(10);
      for (std::size_t i = 0; i < n; ++i) {
        const double p = (static_cast<double>(i) + 0.5) /
                         static_cast<double>(n);
        f << mu + sd * cedr::std_normal_quantile(p) << ',' << x[i] << '\n';
      }
      outputs.push_back("qq_" + name + ".csv");
    }
  }

  json params;
  params["data"] = a.data;
  params["config"] = a.config;
  write_manifest(out_dir, "diagnose", params, 0, outputs);

  if (report.weak_identification) {
    std::cerr << "advisory: weak identification; the copula correction is "
                 "unidentified on these covariates\n";
    return kExitAdvisory;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Copula-corrected doubly robust ATE estimation"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  SimulateArgs sim;
  CLI::App* simulate = app.add_subcommand(
      "simulate", "Run the Monte Carlo grid and write summary tables");
  simulate->add_option("--scenario", sim.scenario, "Simulation scenario")
      ->check(CLI::IsMember({1, 2}))
      ->required();
  simulate->add_option("--n", sim.ns, "Sample size(s) (repeatable)");
  simulate->add_option("--rho", sim.rhos, "Endogeneity level(s) (repeatable)");
  simulate->add_option("--reps", sim.reps, "Monte Carlo replications");
  simulate->add_option("--seed", sim.seed, "Root seed");
  simulate->add_option("--estimators", sim.estimators, "naive|cedr|both");
  simulate->add_option("--misspec", sim.misspec,
                       "both_correct|ps_wrong|outcome_wrong|all");
  simulate->add_option("--out", sim.out, "Output directory");
  simulate->add_flag("--raw", sim.raw, "Also write per-replication records");
  simulate->add_option("--threads", sim.threads,
                       "Worker threads (default: CEDR_THREADS or all cores)");

  EstimateArgs est;
  CLI::App* estimate = app.add_subcommand(
      "estimate", "Estimate the ATE on a study CSV with bootstrap CIs");
  estimate->add_option("--data", est.data, "Study CSV")->required();
  estimate->add_option("--config", est.config, "StudyConfig JSON")->required();
  estimate->add_option("--estimator", est.estimator, "naive|cedr|both");
  estimate->add_option("--bootstrap", est.bootstrap,
                       "Bootstrap replications (default: config value)");
  estimate->add_option("--seed", est.seed, "Root seed");
  estimate->add_option("--out", est.out, "Output directory");
  estimate->add_flag("--force", est.force,
                     "Proceed despite weak identification");
  estimate->add_option("--threads", est.threads,
                       "Worker threads (default: CEDR_THREADS or all cores)");

  DiagnoseArgs diag;
  CLI::App* diagnose = app.add_subcommand(
      "diagnose", "Assumption pre-checks, histograms, and Q-Q tables");
  diagnose->add_option("--data", diag.data, "Study CSV")->required();
  diagnose->add_option("--config", diag.config, "StudyConfig JSON")
      ->required();
  diagnose->add_option("--out", diag.out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints the usage message
    return e.get_exit_code() == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(sim);
    if (estimate->parsed()) return cmd_estimate(est);
    if (diagnose->parsed()) return cmd_diagnose(diag);
  } catch (const cedr::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const cedr::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const cedr::DegenerateStudyError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const cedr::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
  return kExitUsage;
}
