#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "cedr/copula_diag.hpp"
#include "cedr/estimators.hpp"

namespace cedr {

enum class MissingPolicy { drop_rows, error };

// Declarative description of a study CSV: which columns play which role.
struct StudyConfig {
  std::string outcome;
  std::string treatment;
  std::vector<std::string> exogenous;
  std::vector<std::string> endogenous;
  MissingPolicy missing_policy = MissingPolicy::drop_rows;
  std::size_t bootstrap_replications = 5000;

  // Throws ConfigError on overlapping roles or no covariates.
  void validate() const;
};

// Parse a StudyConfig from its JSON representation (field names match the
// struct fields; missing_policy is "drop_rows" or "error").
StudyConfig parse_study_config(const std::string& json_text);
StudyConfig load_study_config(const std::string& path);

struct LoadReport {
  std::size_t n_rows = 0;     // data rows in the file
  std::size_t n_kept = 0;
  std::size_t n_dropped = 0;  // rows removed by the missing-value policy
};

// Load a comma-separated file (header row, decimal numerics, empty/NA cells
// treated as missing) into StudyData with the configured role partition.
// Row order of the file is preserved.
StudyData load_study(const std::string& path, const StudyConfig& config,
                     LoadReport* report = nullptr);

// Write StudyData back out in the same dialect (used for round-tripping and
// by the simulate-to-CSV path).
void write_study_csv(const std::string& path, const StudyData& data);

struct PrecheckReport {
  std::size_t n = 0;
  double treated_share = 0.0;
  // Propensity range from a quick probit on all covariates.
  double min_propensity = 0.0;
  double max_propensity = 0.0;
  std::vector<std::pair<std::string, NormalityReport>> endogenous_normality;
  bool weak_identification = false;  // every endogenous covariate looks normal

  std::string to_text() const;
  std::string to_json() const;
};

// Assumption pre-checks: non-normality of each endogenous covariate, overlap
// preview, treated share. Report-only; never throws on warnings.
PrecheckReport precheck_study(const StudyData& data);

}  // namespace cedr
