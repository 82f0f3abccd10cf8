#include "cedr/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cedr/errors.hpp"
#include "cedr/glm.hpp"
#include "cedr/numerics.hpp"

namespace cedr {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool is_missing(const std::string& cell) {
  return cell.empty() || cell == "NA" || cell == "na" || cell == "NaN" ||
         cell == "nan" || cell == "NULL";
}

double parse_number(const std::string& cell, std::size_t row,
                    const std::string& col) {
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (end == cell.c_str() || *end != '\0') {
    throw ParseError("load_study: cannot parse '" + cell + "' in column " +
                     col + ", row " + std::to_string(row));
  }
  return v;
}

}  // namespace

void StudyConfig::validate() const {
  if (outcome.empty() || treatment.empty()) {
    throw ConfigError("StudyConfig: outcome and treatment must be named");
  }
  std::vector<std::string> all{outcome, treatment};
  all.insert(all.end(), exogenous.begin(), exogenous.end());
  all.insert(all.end(), endogenous.begin(), endogenous.end());
  std::set<std::string> uniq(all.begin(), all.end());
  if (uniq.size() != all.size()) {
    throw ConfigError("StudyConfig: column roles overlap");
  }
  if (exogenous.empty() && endogenous.empty()) {
    throw ConfigError("StudyConfig: at least one covariate is required");
  }
}

StudyConfig parse_study_config(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("StudyConfig: invalid JSON: ") + e.what());
  }
  StudyConfig c;
  try {
    c.outcome = j.at("outcome").get<std::string>();
    c.treatment = j.at("treatment").get<std::string>();
    c.exogenous = j.value("exogenous", std::vector<std::string>{});
    c.endogenous = j.value("endogenous", std::vector<std::string>{});
    const std::string policy = j.value("missing_policy", "drop_rows");
    if (policy == "drop_rows") {
      c.missing_policy = MissingPolicy::drop_rows;
    } else if (policy == "error") {
      c.missing_policy = MissingPolicy::error;
    } else {
      throw ConfigError("StudyConfig: unknown missing_policy '" + policy + "'");
    }
    c.bootstrap_replications = j.value("bootstrap_replications", std::size_t{5000});
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("StudyConfig: missing or mistyped field: ") +
                      e.what());
  }
  c.validate();
  return c;
}

StudyConfig load_study_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_study_config(buf.str());
}

StudyData load_study(const std::string& path, const StudyConfig& config,
                     LoadReport* report) {
  config.validate();
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open data file: " + path);

  std::string line;
  if (!std::getline(in, line)) {
    throw ParseError("load_study: empty file " + path);
  }
  std::vector<std::string> header = split_csv_line(line);
  for (auto& h : header) h = trim(h);
  std::map<std::string, std::size_t> col_index;
  for (std::size_t j = 0; j < header.size(); ++j) col_index[header[j]] = j;

  std::vector<std::string> needed{config.outcome, config.treatment};
  needed.insert(needed.end(), config.exogenous.begin(), config.exogenous.end());
  needed.insert(needed.end(), config.endogenous.begin(),
                config.endogenous.end());
  for (const auto& name : needed) {
    if (!col_index.count(name)) {
      throw ConfigError("load_study: column '" + name + "' not in " + path);
    }
  }

  std::vector<double> y, t;
  std::vector<std::vector<double>> exo(config.exogenous.size());
  std::vector<std::vector<double>> endo(config.endogenous.size());
  std::set<std::string> bad_treatment;
  LoadReport rep;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    ++rep.n_rows;
    std::vector<std::string> cells = split_csv_line(line);
    bool missing = false;
    for (const auto& name : needed) {
      const std::size_t j = col_index[name];
      if (j >= cells.size() || is_missing(trim(cells[j]))) {
        missing = true;
        break;
      }
    }
    if (missing) {
      if (config.missing_policy == MissingPolicy::error) {
        throw ParseError("load_study: missing value in row " +
                         std::to_string(row));
      }
      ++rep.n_dropped;
      continue;
    }
    const double tv =
        parse_number(trim(cells[col_index[config.treatment]]), row,
                     config.treatment);
    if (tv != 0.0 && tv != 1.0) {
      bad_treatment.insert(trim(cells[col_index[config.treatment]]));
      continue;
    }
    y.push_back(parse_number(trim(cells[col_index[config.outcome]]), row,
                             config.outcome));
    t.push_back(tv);
    for (std::size_t k = 0; k < config.exogenous.size(); ++k) {
      exo[k].push_back(parse_number(trim(cells[col_index[config.exogenous[k]]]),
                                    row, config.exogenous[k]));
    }
    for (std::size_t k = 0; k < config.endogenous.size(); ++k) {
      endo[k].push_back(parse_number(
          trim(cells[col_index[config.endogenous[k]]]), row,
          config.endogenous[k]));
    }
    ++rep.n_kept;
  }
  if (!bad_treatment.empty()) {
    std::string values;
    for (const auto& v : bad_treatment) values += " '" + v + "'";
    throw ParseError("load_study: non-binary treatment values:" + values);
  }

  StudyData data;
  data.y = std::move(y);
  data.t = std::move(t);
  data.exogenous = Matrix(data.y.size(), config.exogenous.size());
  for (std::size_t k = 0; k < exo.size(); ++k) data.exogenous.set_column(k, exo[k]);
  data.endogenous = Matrix(data.y.size(), config.endogenous.size());
  for (std::size_t k = 0; k < endo.size(); ++k) data.endogenous.set_column(k, endo[k]);
  data.exogenous_names = config.exogenous;
  data.endogenous_names = config.endogenous;
  data.validate();
  if (report) *report = rep;
  return data;
}

void write_study_csv(const std::string& path, const StudyData& data) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open output file: " + path);
  out << "y,t";
  for (const auto& n : data.exogenous_names) out << ',' << n;
  for (const auto& n : data.endogenous_names) out << ',' << n;
  out << '\n';
  out.precision(17);
  for (std::size_t i = 0; i < data.n(); ++i) {
    out << data.y[i] << ',' << data.t[i];
    for (std::size_t j = 0; j < data.exogenous.cols(); ++j)
      out << ',' << data.exogenous(i, j);
    for (std::size_t j = 0; j < data.endogenous.cols(); ++j)
      out << ',' << data.endogenous(i, j);
    out << '\n';
  }
}

PrecheckReport precheck_study(const StudyData& data) {
  data.validate();
  PrecheckReport r;
  r.n = data.n();
  r.treated_share = mean(data.t);

  for (std::size_t j = 0; j < data.endogenous.cols(); ++j) {
    r.endogenous_normality.emplace_back(
        data.endogenous_names[j],
        normality_report(data.endogenous.column(j)));
  }
  r.weak_identification =
      !r.endogenous_normality.empty() &&
      std::all_of(r.endogenous_normality.begin(), r.endogenous_normality.end(),
                  [](const auto& p) { return p.second.weak_identification; });

  // Overlap preview: probit on every covariate. A fit failure here is
  // advisory (the report simply shows the full [0,1] range).
  try {
    ModelSpec spec;
    spec.ps_columns = data.exogenous_names;
    spec.ps_columns.insert(spec.ps_columns.end(), data.endogenous_names.begin(),
                           data.endogenous_names.end());
    spec.outcome_columns = spec.ps_columns;
    AteEstimate quick = naive_dr(data, spec);
    r.min_propensity = quick.min_propensity;
    r.max_propensity = quick.max_propensity;
  } catch (const Error&) {
    r.min_propensity = 0.0;
    r.max_propensity = 1.0;
  }
  return r;
}

std::string PrecheckReport::to_text() const {
  std::ostringstream os;
  os << "Study pre-check (n = " << n << ")\n";
  os << "  treated share: " << treated_share << "\n";
  os << "  propensity range (clipped probit preview): [" << min_propensity
     << ", " << max_propensity << "]\n";
  for (const auto& [name, rep] : endogenous_normality) {
    os << "  endogenous '" << name << "': AD = " << rep.anderson_darling_stat
       << " (p = " << rep.anderson_darling_p
       << "), CvM = " << rep.cramer_von_mises_stat
       << " (p = " << rep.cramer_von_mises_p
       << "), skewness = " << rep.skewness;
    if (rep.weak_identification) os << "  [WARNING: looks normal]";
    os << "\n";
  }
  if (weak_identification) {
    os << "  WARNING: weak identification (every endogenous covariate "
          "passes normality)\n";
  }
  return os.str();
}

std::string PrecheckReport::to_json() const {
  nlohmann::json j;
  j["n"] = n;
  j["treated_share"] = treated_share;
  j["min_propensity"] = min_propensity;
  j["max_propensity"] = max_propensity;
  j["weak_identification"] = weak_identification;
  j["endogenous"] = nlohmann::json::array();
  for (const auto& [name, rep] : endogenous_normality) {
    j["endogenous"].push_back({{"name", name},
                               {"anderson_darling_stat", rep.anderson_darling_stat},
                               {"anderson_darling_p", rep.anderson_darling_p},
                               {"cramer_von_mises_stat", rep.cramer_von_mises_stat},
                               {"cramer_von_mises_p", rep.cramer_von_mises_p},
                               {"skewness", rep.skewness},
                               {"weak_identification", rep.weak_identification}});
  }
  return j.dump(2);
}

}  // namespace cedr
