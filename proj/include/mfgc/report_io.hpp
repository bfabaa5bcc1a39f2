#pragma once

#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mfgc/common.hpp"
#include "mfgc/contraction.hpp"
#include "mfgc/model.hpp"
#include "mfgc/slowfast.hpp"
#include "mfgc/solvers.hpp"

namespace mfgc {

inline constexpr const char* kReportSchema = "mfgc-report/1";

struct ContractionReport {
  std::string model_path;
  LipschitzProfile profile;

  bool has_stationary = false;
  StationaryCertificate stationary;
  double rho_m = std::numeric_limits<double>::quiet_NaN();

  bool has_finite = false;
  VariationalResult finite_a;  // certificate variant
  VariationalResult finite_b;  // reported alongside
  bool variant_disagreement = false;

  std::vector<LimitScanRow> rho_st_samples;
  double inf_rho_b = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> z0_roots;

  std::vector<MfgSlowFastReport> slowfast;
};

namespace detail {

inline nlohmann::json profile_json(const LipschitzProfile& p) {
  return {{"L", p.L},       {"K", p.K},     {"beta", p.beta},         {"rho", p.rho},
          {"M", p.M},       {"Lbar", p.Lbar}, {"Kbar", p.Kbar},       {"a", p.a},
          {"Kbar_inf", p.Kbar_inf}, {"beta_max", p.beta_max},
          {"empirical_exceeds_declared", p.empirical_exceeds_declared}};
}

inline nlohmann::json variational_json(const VariationalResult& v) {
  nlohmann::json j{{"r_star", v.r_star},
                   {"V_star", v.v_star},
                   {"certified", v.certified},
                   {"regime", regime_name(v.regime)},
                   {"one_in_interval", v.one_in_interval},
                   {"t_o", v.t_o}};
  if (v.one_in_interval) j["V_at_one"] = v.v_at_one;
  if (!v.reason.empty()) j["reason"] = v.reason;
  return j;
}

}  // namespace detail

inline nlohmann::json report_to_json(const ContractionReport& r) {
  nlohmann::json j;
  j["schema"] = kReportSchema;
  if (!r.model_path.empty()) j["model"] = r.model_path;
  j["profile"] = detail::profile_json(r.profile);
  if (r.has_stationary) {
    nlohmann::json s{{"closed_form_sum", r.stationary.sum},
                     {"certified", r.stationary.certified},
                     {"margin", r.stationary.margin}};
    if (!std::isnan(r.rho_m)) s["rho_M"] = r.rho_m;
    if (!r.stationary.reason.empty()) s["reason"] = r.stationary.reason;
    j["stationary"] = std::move(s);
  }
  if (r.has_finite) {
    j["finite_horizon"] = {{"variant", "A"},
                           {"A", detail::variational_json(r.finite_a)},
                           {"B", detail::variational_json(r.finite_b)},
                           {"variant_disagreement", r.variant_disagreement}};
  }
  if (!r.rho_st_samples.empty() || !std::isnan(r.inf_rho_b) || !r.z0_roots.empty()) {
    nlohmann::json d;
    if (!r.rho_st_samples.empty()) {
      nlohmann::json rows = nlohmann::json::array();
      for (const auto& row : r.rho_st_samples)
        rows.push_back({{"T", row.T}, {"rho_ST", row.rho_st}, {"gap", row.gap}});
      d["rho_ST"] = std::move(rows);
    }
    if (!std::isnan(r.inf_rho_b)) d["inf_rho_B"] = r.inf_rho_b;
    if (!r.z0_roots.empty()) d["z0_roots"] = r.z0_roots;
    j["diagnostics"] = std::move(d);
  }
  if (!r.slowfast.empty()) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& sf : r.slowfast) {
      nlohmann::json row{{"mode", sf.mode == SlowFastMode::Stationary ? "stationary" : "finite"},
                         {"split", sf.split},
                         {"certified", sf.certified},
                         {"direct_certified", sf.direct_certified},
                         {"agree", sf.agree}};
      if (sf.mode == SlowFastMode::FiniteHorizon) row["T"] = sf.horizon;
      nlohmann::json rhos = nlohmann::json::array();
      for (double v : sf.chain.leading_rho) rhos.push_back(v);
      row["leading_rho"] = std::move(rhos);
      if (sf.chain.feasible) row["final_rho"] = sf.chain.final_rho;
      row["feasible"] = sf.chain.feasible;
      rows.push_back(std::move(row));
    }
    j["slowfast"] = std::move(rows);
  }
  return j;
}

// CSV with a header row, UTF-8, '.' decimal separator.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header) : out_(path) {
    if (!out_) throw Error("cannot write csv file: " + path);
    out_.imbue(std::locale::classic());
    for (std::size_t k = 0; k < header.size(); ++k) out_ << (k ? "," : "") << header[k];
    out_ << "\n";
    out_ << std::setprecision(17);
  }

  void row(const std::vector<double>& values) {
    for (std::size_t k = 0; k < values.size(); ++k) out_ << (k ? "," : "") << values[k];
    out_ << "\n";
  }

 private:
  std::ofstream out_;
};

inline void write_trace_csv(const std::string& path, const SolveTrace& trace) {
  CsvWriter csv(path, {"iteration", "residual", "rate"});
  for (std::size_t n = 0; n < trace.residuals.size(); ++n) {
    double rate = n > 0 && trace.residuals[n - 1] > 0.0 ? trace.residuals[n] / trace.residuals[n - 1] : 0.0;
    csv.row({static_cast<double>(n + 1), trace.residuals[n], rate});
  }
}

inline void write_flow_csv(const std::string& path, const StateMeasureFlow& flow) {
  if (flow.data.empty()) throw Error("write_flow_csv: empty flow");
  std::vector<std::string> header{"t", "population", "state", "mass"};
  CsvWriter csv(path, header);
  for (std::size_t t = 0; t < flow.data.size(); ++t)
    for (std::size_t i = 0; i < flow.data[t].size(); ++i)
      for (std::size_t x = 0; x < flow.data[t][i].size(); ++x)
        csv.row({static_cast<double>(t), static_cast<double>(i), static_cast<double>(x), flow.data[t][i][x]});
}

inline void write_policy_csv(const std::string& path, const PolicyFlow& policy) {
  CsvWriter csv(path, {"t", "population", "state", "action", "probability"});
  for (std::size_t t = 0; t < policy.pi.size(); ++t)
    for (std::size_t i = 0; i < policy.pi[t].size(); ++i)
      for (std::size_t x = 0; x < policy.pi[t][i].size(); ++x)
        for (std::size_t a = 0; a < policy.pi[t][i][x].size(); ++a)
          csv.row({static_cast<double>(t), static_cast<double>(i), static_cast<double>(x), static_cast<double>(a),
                   policy.pi[t][i][x][a]});
}

}  // namespace mfgc
