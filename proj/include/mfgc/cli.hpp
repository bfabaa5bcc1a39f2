#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "mfgc/common.hpp"
#include "mfgc/contraction.hpp"
#include "mfgc/matrix.hpp"
#include "mfgc/model.hpp"
#include "mfgc/model_io.hpp"
#include "mfgc/rates.hpp"
#include "mfgc/report_io.hpp"
#include "mfgc/slowfast.hpp"
#include "mfgc/solvers.hpp"

namespace mfgc::cli {

// exit codes: 0 ok/certified, 1 error, 2 not certified / not applicable,
// 3 iteration limit with best iterate persisted
enum ExitCode { kOk = 0, kError = 1, kNotCertified = 2, kIterationLimit = 3 };

struct RunConfig {
  std::string command;
  std::string model_path;
  std::string out_dir = ".";
  std::string mode = "both";    // stationary | finite | both
  std::string variant = "both"; // A | B | both
  double tol = 1e-9;
  long max_iter = 10000;
  std::size_t horizon = 8;
  std::vector<std::size_t> T_list;
  std::size_t grid = 2048;
  std::size_t ratio_T = 0;
  std::size_t split = 1;
  long campaign = 0;
  std::uint64_t seed = 1;
  std::size_t t_probe = 3;
  std::size_t T_ref = 70;
  std::vector<std::size_t> k_list;
  std::size_t T_big = 120;
  double t_star = 0.0;
};

namespace detail {

inline std::filesystem::path out_path(const RunConfig& cfg, const std::string& name) {
  std::filesystem::create_directories(cfg.out_dir);
  return std::filesystem::path(cfg.out_dir) / name;
}

inline void write_report(const RunConfig& cfg, const ContractionReport& rep, const std::string& name = "report.json") {
  std::ofstream out(out_path(cfg, name));
  out << report_to_json(rep).dump(2) << "\n";
}

inline MfgModel load_checked(const RunConfig& cfg) {
  MfgModel m = load_model(cfg.model_path);
  ValidationReport v = validate_model(m);
  if (!v.valid()) {
    std::string msg = "model validation failed:";
    for (const auto& s : v.violations) msg += "\n  " + s;
    throw SchemaError(msg);
  }
  return m;
}

}  // namespace detail

inline int cmd_certify(const RunConfig& cfg) {
  MfgModel model = detail::load_checked(cfg);
  LipschitzProfile prof = estimate_lipschitz(model);
  ContractionReport rep;
  rep.model_path = cfg.model_path;
  rep.profile = prof;
  bool want_stationary = cfg.mode == "stationary" || cfg.mode == "both";
  bool want_finite = cfg.mode == "finite" || cfg.mode == "both";
  bool certified = true;
  if (want_stationary) {
    rep.has_stationary = true;
    rep.stationary = stationary_certificate(prof);
    if (1.0 < 1.0 / prof.beta_max) rep.rho_m = rho_B(prof, 1.0, Variant::A);
    certified = certified && rep.stationary.certified;
    std::cout << "stationary: sum=" << rep.stationary.sum << " certified=" << (rep.stationary.certified ? "yes" : "no");
    if (!rep.stationary.reason.empty()) std::cout << " (" << rep.stationary.reason << ")";
    std::cout << "\n";
  }
  if (want_finite) {
    rep.has_finite = true;
    MinimizeVOptions opt;
    opt.grid = cfg.grid;
    rep.finite_a = minimize_V(prof, Variant::A, opt);
    rep.finite_b = minimize_V(prof, Variant::B, opt);
    rep.variant_disagreement = rep.finite_a.certified != rep.finite_b.certified;
    certified = certified && rep.finite_a.certified;
    std::cout << "finite-horizon (variant A): r*=" << rep.finite_a.r_star << " V(r*)=" << rep.finite_a.v_star
              << " regime=" << regime_name(rep.finite_a.regime) << "\n";
    if (cfg.variant == "both" || cfg.variant == "B")
      std::cout << "finite-horizon (variant B): r*=" << rep.finite_b.r_star << " V(r*)=" << rep.finite_b.v_star
                << " regime=" << regime_name(rep.finite_b.regime) << "\n";
    if (rep.variant_disagreement) std::cout << "note: variants A and B disagree on certification\n";
  }
  detail::write_report(cfg, rep);
  return certified ? kOk : kNotCertified;
}

inline int cmd_solve(const RunConfig& cfg) {
  MfgModel model = detail::load_checked(cfg);
  SolveOptions opt;
  opt.tol = cfg.tol;
  opt.max_iter = cfg.max_iter;
  MeasureSlice tau0(static_cast<std::size_t>(model.n_pops()), uniform_dist(static_cast<std::size_t>(model.n_states())));
  if (cfg.mode == "stationary" || cfg.mode == "both") {
    StationarySolution sol = solve_stationary(model, tau0, opt);
    write_trace_csv(detail::out_path(cfg, "stationary_trace.csv").string(), sol.trace);
    StateMeasureFlow slice;
    slice.data.push_back(sol.measure);
    write_flow_csv(detail::out_path(cfg, "stationary_measure.csv").string(), slice);
    write_policy_csv(detail::out_path(cfg, "stationary_policy.csv").string(), sol.policy);
    std::cout << "stationary solve: iterations=" << sol.trace.iterations
              << " residual=" << (sol.trace.residuals.empty() ? 0.0 : sol.trace.residuals.back())
              << " converged=" << (sol.trace.converged ? "yes" : "no") << "\n";
    if (!sol.trace.converged) return kIterationLimit;
  }
  if (cfg.mode == "finite" || cfg.mode == "both") {
    FiniteHorizonSolution sol = solve_finite_horizon(model, tau0, cfg.horizon, opt);
    write_trace_csv(detail::out_path(cfg, "finite_trace.csv").string(), sol.trace);
    write_flow_csv(detail::out_path(cfg, "finite_flow.csv").string(), sol.flow);
    write_policy_csv(detail::out_path(cfg, "finite_policy.csv").string(), sol.policy);
    std::cout << "finite solve (T=" << cfg.horizon << "): iterations=" << sol.trace.iterations
              << " residual=" << (sol.trace.residuals.empty() ? 0.0 : sol.trace.residuals.back())
              << " converged=" << (sol.trace.converged ? "yes" : "no") << "\n";
    if (!sol.trace.converged) return kIterationLimit;
  }
  return kOk;
}

inline int cmd_scan(const RunConfig& cfg) {
  MfgModel model = detail::load_checked(cfg);
  LipschitzProfile prof = estimate_lipschitz(model);
  ContractionReport rep;
  rep.model_path = cfg.model_path;
  rep.profile = prof;
  RInterval iv = r_interval(prof);
  if (iv.empty()) {
    detail::write_report(cfg, rep, "scan_report.json");
    std::cerr << "scan: empty r-interval (Kbar_inf >= 1/beta_max)\n";
    return kNotCertified;
  }
  {
    CsvWriter csv(detail::out_path(cfg, "scan_r.csv").string(), {"r", "V_A", "V_B", "rho_B_A", "rho_B_B"});
    double lo = std::max(iv.lo * (1.0 + 1e-9), iv.hi * 1e-8), hi = iv.hi * (1.0 - 1e-9);
    for (std::size_t k = 0; k < cfg.grid; ++k) {
      double r = std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * static_cast<double>(k) /
                                             static_cast<double>(cfg.grid - 1));
      csv.row({r, variational_V(prof, r, Variant::A), variational_V(prof, r, Variant::B), rho_B(prof, r, Variant::A),
               rho_B(prof, r, Variant::B)});
    }
  }
  std::vector<std::size_t> tlist = cfg.T_list;
  if (tlist.empty()) tlist = {10, 25, 50, 100, 200};
  LimitScan scan = limit_consistency_scan(prof, tlist, Variant::A);
  rep.rho_st_samples = scan.rows;
  rep.inf_rho_b = scan.inf_rho_b;
  {
    CsvWriter csv(detail::out_path(cfg, "scan_T.csv").string(), {"T", "rho_ST", "gap"});
    for (const auto& row : scan.rows) csv.row({static_cast<double>(row.T), row.rho_st, row.gap});
  }
  std::cout << "scan: inf_r rho(B(r)) = " << scan.inf_rho_b << " at r = " << scan.r_at_inf << "\n";
  for (const auto& row : scan.rows)
    std::cout << "  T=" << row.T << " rho(S_T)=" << row.rho_st << " gap=" << row.gap << "\n";
  if (cfg.ratio_T >= 50) {
    PerronRatioDiagnostic diag = perron_ratio_diagnostic(prof, cfg.ratio_T);
    CsvWriter csv(detail::out_path(cfg, "scan_ratios.csv").string(), {"k", "population", "ratio"});
    for (std::size_t i = 0; i < diag.ratios.size(); ++i)
      for (std::size_t k = 0; k < diag.ratios[i].size(); ++k)
        csv.row({static_cast<double>(k + 1), static_cast<double>(i), diag.ratios[i][k]});
    std::cout << "perron ratios (T=" << cfg.ratio_T << "): tail=" << diag.tail_estimate
              << " spread=" << diag.ratio_spread << "\n";
    try {
      rep.z0_roots = constraint_roots(prof, diag.rho_st, Variant::B);
    } catch (const EmptyInterval&) {
    }
  }
  detail::write_report(cfg, rep, "scan_report.json");
  return kOk;
}

namespace detail {

// random nonnegative block matrix with spectral radius rescaled into [0.2,1.8]
inline Matrix random_scaled_matrix(Rng& rng, std::size_t dim, double target) {
  while (true) {
    Matrix a(dim, dim);
    for (std::size_t r = 0; r < dim; ++r)
      for (std::size_t c = 0; c < dim; ++c) a(r, c) = rng.uniform() < 0.7 ? rng.uniform() : 0.0;
    double rho = gelfand_spectral_radius(a);
    if (rho < 1e-8) continue;
    double f = target / rho;
    for (std::size_t r = 0; r < dim; ++r)
      for (std::size_t c = 0; c < dim; ++c) a(r, c) *= f;
    return a;
  }
}

}  // namespace detail

inline int cmd_slowfast(const RunConfig& cfg) {
  if (cfg.campaign > 0) {
    Rng rng(cfg.seed);
    long disagreements = 0, checked = 0, marginal = 0;
    CsvWriter csv(detail::out_path(cfg, "slowfast_campaign.csv").string(),
                  {"case", "dim", "rho", "certified", "agree"});
    for (long n = 0; n < cfg.campaign; ++n) {
      std::size_t m = 2 + rng.index(3);  // 2..4 blocks
      BlockPartition part;
      std::size_t dim = 0;
      for (std::size_t k = 0; k < m; ++k) {
        std::size_t s = 1 + rng.index(3);
        part.sizes.push_back(s);
        dim += s;
      }
      double target = rng.uniform(0.2, 1.8);
      Matrix a = detail::random_scaled_matrix(rng, dim, target);
      double rho = gelfand_spectral_radius(a);
      SlowFastCertificate cert = slowfast_certificate(a, part);
      bool in_band = std::abs(rho - 1.0) <= 1e-8;
      for (double rb : cert.chain.leading_rho) in_band = in_band || std::abs(rb - 1.0) <= 1e-8;
      if (cert.chain.feasible) in_band = in_band || std::abs(cert.chain.final_rho - 1.0) <= 1e-8;
      if (in_band) {
        ++marginal;
        continue;
      }
      ++checked;
      bool agree = cert.certified == (rho < 1.0);
      if (!agree) ++disagreements;
      csv.row({static_cast<double>(n), static_cast<double>(dim), rho, cert.certified ? 1.0 : 0.0, agree ? 1.0 : 0.0});
    }
    std::cout << "slowfast campaign: " << checked << " checked, " << marginal << " marginal skipped, "
              << disagreements << " disagreements\n";
    return disagreements == 0 ? kOk : kError;
  }
  MfgModel model = detail::load_checked(cfg);
  LipschitzProfile prof = estimate_lipschitz(model);
  ContractionReport rep;
  rep.model_path = cfg.model_path;
  rep.profile = prof;
  if (cfg.mode == "stationary" || cfg.mode == "both") {
    rep.slowfast.push_back(mfg_slowfast_check(prof, cfg.split, SlowFastMode::Stationary));
    rep.has_stationary = true;
    rep.stationary = stationary_certificate(prof);
  }
  if (cfg.mode == "finite" || cfg.mode == "both")
    rep.slowfast.push_back(mfg_slowfast_check(prof, cfg.split, SlowFastMode::FiniteHorizon, cfg.horizon));
  detail::write_report(cfg, rep, "slowfast_report.json");
  bool all_ok = true;
  for (const auto& sf : rep.slowfast) {
    std::cout << (sf.mode == SlowFastMode::Stationary ? "stationary" : "finite") << " split=" << sf.split
              << ": slow-fast certified=" << (sf.certified ? "yes" : "no")
              << " direct=" << (sf.direct_certified ? "yes" : "no") << " agree=" << (sf.agree ? "yes" : "no") << "\n";
    all_ok = all_ok && sf.certified;
  }
  return all_ok ? kOk : kNotCertified;
}

inline int cmd_rates(const RunConfig& cfg) {
  MfgModel model = detail::load_checked(cfg);
  LipschitzProfile prof = estimate_lipschitz(model);
  VariationalResult var = minimize_V(prof, Variant::A);
  if (!(var.t_o > 1.0)) {
    nlohmann::json meta{{"error", "NotStable"}, {"reason", "no certified t_o > 1"},
                        {"V_star", var.v_star}, {"r_star", var.r_star}, {"regime", regime_name(var.regime)}};
    std::ofstream out(detail::out_path(cfg, "rates_report.json"));
    out << meta.dump(2) << "\n";
    std::cerr << "rates: NotStable (no certified t_o > 1)\n";
    return kNotCertified;
  }
  double t_star = cfg.t_star > 0.0 ? cfg.t_star : (var.r_star > 1.0 ? var.r_star : var.t_o);
  RInterval iv = r_interval(prof);
  if (!iv.contains(t_star)) {
    std::cerr << "rates: t_star " << t_star << " outside (" << iv.lo << ", " << iv.hi << ")\n";
    return kError;
  }
  std::size_t T_weights = std::max<std::size_t>(cfg.horizon, 10);
  LyapunovWeights lw = lyapunov_weights(prof, T_weights, t_star);
  std::cout << "lyapunov weights: t*=" << lw.t_star << " rho(B(t*))=" << lw.rho_b
            << " majorization margin=" << lw.majorization_margin << "\n";

  MeasureSlice tau0(static_cast<std::size_t>(model.n_pops()), uniform_dist(static_cast<std::size_t>(model.n_states())));
  std::vector<std::size_t> tlist = cfg.T_list;
  if (tlist.empty()) tlist = {10, 14, 18, 22, 26};
  DecayOptions dopt;
  dopt.tol = std::min(cfg.tol, 1e-11);
  DecayFit fit = horizon_decay_experiment(model, tau0, cfg.t_probe, tlist, cfg.T_ref, dopt);
  {
    CsvWriter csv(detail::out_path(cfg, "decay.csv").string(), {"T", "e_T"});
    for (std::size_t k = 0; k < fit.horizons.size(); ++k)
      csv.row({static_cast<double>(fit.horizons[k]), fit.errors[k]});
  }
  nlohmann::json meta{{"slope", fit.slope},         {"predicted", fit.predicted}, {"t_o", fit.t_o},
                      {"agreement", fit.agreement}, {"t_probe", fit.t_probe},     {"fitted_points", fit.fitted_points},
                      {"t_star", t_star},           {"rho_B_t_star", lw.rho_b}};
  std::cout << "decay: slope=" << fit.slope << " predicted=" << fit.predicted << " agreement=" << fit.agreement
            << "\n";

  if (!cfg.k_list.empty()) {
    StationaryGapReport gap = stationary_gap_experiment(model, tau0, cfg.k_list, cfg.T_big, dopt);
    CsvWriter csv(detail::out_path(cfg, "gap.csv").string(), {"k", "g_k"});
    for (const auto& row : gap.rows) csv.row({static_cast<double>(row.k), row.g});
    meta["envelope_base"] = gap.envelope_base;
    meta["max_envelope_ratio"] = gap.max_envelope_ratio;
    std::cout << "stationary gap: base=" << gap.envelope_base << " max envelope ratio=" << gap.max_envelope_ratio
              << "\n";
  }
  std::ofstream out(detail::out_path(cfg, "rates_report.json"));
  out << meta.dump(2) << "\n";
  return kOk;
}

inline int run(const RunConfig& cfg) {
  try {
    if (cfg.command == "certify") return cmd_certify(cfg);
    if (cfg.command == "solve") return cmd_solve(cfg);
    if (cfg.command == "scan") return cmd_scan(cfg);
    if (cfg.command == "slowfast") return cmd_slowfast(cfg);
    if (cfg.command == "rates") return cmd_rates(cfg);
    std::cerr << "unknown command: " << cfg.command << "\n";
    return kError;
  } catch (const NotStable& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNotCertified;
  } catch (const EmptyInterval& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNotCertified;
  } catch (const IterationLimit& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIterationLimit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kError;
  }
}

}  // namespace mfgc::cli
