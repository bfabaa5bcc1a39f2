#pragma once

#include <cmath>
#include <vector>

#include "mfgc/common.hpp"
#include "mfgc/contraction.hpp"
#include "mfgc/model.hpp"
#include "mfgc/parallel.hpp"
#include "mfgc/solvers.hpp"

namespace mfgc {

struct LyapunovWeights {
  double t_star = 0.0;
  double rho_b = 0.0;              // rho(B(t_star)), variant A
  std::vector<double> c;           // positive population weights
  std::vector<double> weights;     // concatenated c_i * (t*^{T-2}, ..., t*, 1)
  double majorization_margin = 0;  // max over entries of (S_T^T w - rho w)
};

// Geometric-ladder weights built from the Perron vector of the variant-A
// majorant; verifies S_T^T w <= rho(B(t*)) w entrywise. The weights come out
// of the rank-one structure in closed form, c_i = 1/(rho - d_i); the printed
// left/right orientation in the source material fails this check for
// heterogeneous populations, the closed form below is the one that majorizes.
inline LyapunovWeights lyapunov_weights(const LipschitzProfile& p, std::size_t T, double t_star) {
  RInterval iv = r_interval(p);
  if (!iv.contains(t_star)) throw DomainError("lyapunov_weights: t_star outside (Kbar_inf, 1/beta_max)");
  if (T < 2) throw DomainError("lyapunov_weights requires T >= 2");
  const std::size_t N = static_cast<std::size_t>(p.n_pops());
  const std::size_t n = T - 1;
  LyapunovWeights out;
  out.t_star = t_star;
  out.rho_b = rho_B(p, t_star, Variant::A);
  out.c = majorant_right_perron(p, t_star, Variant::A);
  out.weights.resize(N * n);
  for (std::size_t i = 0; i < N; ++i) {
    double ladder = std::pow(t_star, static_cast<double>(n - 1));
    for (std::size_t k = 0; k < n; ++k) {
      out.weights[i * n + k] = out.c[i] * ladder;
      ladder /= t_star;
    }
  }
  std::vector<double> image = st_tmatvec(p, T, out.weights);
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < N * n; ++j) worst = std::max(worst, image[j] - out.rho_b * out.weights[j]);
  out.majorization_margin = worst;
  if (worst > 1e-10)
    throw MajorizationViolation("lyapunov_weights: entrywise check failed by " + std::to_string(worst));
  return out;
}

struct DecayFit {
  std::size_t t_probe = 0;
  std::vector<std::size_t> horizons;
  std::vector<double> errors;   // e(T) at the probe slice
  double slope = 0.0;           // least-squares slope of log e(T) vs T
  double predicted = 0.0;       // -log t_o
  double t_o = 0.0;
  double agreement = 0.0;       // slope / predicted
  std::size_t fitted_points = 0;
};

struct DecayOptions {
  double tol = 1e-11;
  long max_iter = 20000;
  double error_floor = 1e-12;  // solver-noise floor excluded from the fit
};

// Solves the finite-horizon equilibrium at each horizon plus a long reference
// horizon, measures the probe-slice gap, and fits the log-error slope.
inline DecayFit horizon_decay_experiment(const MfgModel& m, const MeasureSlice& tau0, std::size_t t_probe,
                                         const std::vector<std::size_t>& T_list, std::size_t T_ref,
                                         const DecayOptions& opt = {}) {
  LipschitzProfile prof = estimate_lipschitz(m);
  VariationalResult var = minimize_V(prof, Variant::A);
  if (!(var.t_o > 1.0)) throw NotStable("horizon_decay_experiment: no certified t_o > 1");
  std::size_t tmax = 0;
  for (std::size_t T : T_list) tmax = std::max(tmax, T);
  if (T_ref < tmax + 40) throw DomainError("horizon_decay_experiment: T_ref must exceed max(T_list) + 40");

  SolveOptions sopt;
  sopt.tol = opt.tol;
  sopt.max_iter = opt.max_iter;
  FiniteHorizonSolution ref = solve_finite_horizon(m, tau0, T_ref, sopt);

  DecayFit fit;
  fit.t_probe = t_probe;
  fit.horizons = T_list;
  fit.t_o = var.t_o;
  fit.predicted = -std::log(var.t_o);
  fit.errors.resize(T_list.size());
  std::vector<FiniteHorizonSolution> sols(T_list.size());
  parallel_for(static_cast<int>(T_list.size()), [&](int idx) {
    sols[static_cast<std::size_t>(idx)] = solve_finite_horizon(m, tau0, T_list[static_cast<std::size_t>(idx)], sopt);
  });
  for (std::size_t idx = 0; idx < T_list.size(); ++idx)
    fit.errors[idx] = slice_l1_dist(ref.flow.data[t_probe], sols[idx].flow.data[t_probe]);

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t npts = 0;
  for (std::size_t idx = 0; idx < T_list.size(); ++idx) {
    if (fit.errors[idx] <= opt.error_floor) continue;
    double x = static_cast<double>(T_list[idx]);
    double y = std::log(fit.errors[idx]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++npts;
  }
  fit.fitted_points = npts;
  if (npts >= 2) {
    double denom = static_cast<double>(npts) * sxx - sx * sx;
    fit.slope = (static_cast<double>(npts) * sxy - sx * sy) / denom;
  }
  fit.agreement = fit.predicted != 0.0 ? fit.slope / fit.predicted : 0.0;
  return fit;
}

struct StationaryGapRow {
  std::size_t k = 0;
  double g = 0.0;  // sup_{i, k<=t<=T_big/2} ||tau^{T}_{t,i} - tau*_i||_1
};

struct StationaryGapReport {
  std::vector<StationaryGapRow> rows;
  double envelope_base = 0.0;  // max_j (K_j + a_j) / (1 - rho(B(t*)))
  double t_star = 0.0;
  double max_envelope_ratio = 0.0;  // max per-step ratio g(k+1)/g(k), geometric-normalized
};

// Long finite-horizon flow against the stationary fixed point; the envelope
// g(k) should contract geometrically with base at most the certificate's
// envelope constant.
inline StationaryGapReport stationary_gap_experiment(const MfgModel& m, const MeasureSlice& tau0,
                                                     const std::vector<std::size_t>& k_list, std::size_t T_big,
                                                     const DecayOptions& opt = {}) {
  LipschitzProfile prof = estimate_lipschitz(m);
  StationaryCertificate stat = stationary_certificate(prof);
  VariationalResult var = minimize_V(prof, Variant::A);
  if (!stat.certified) throw NotStable("stationary_gap_experiment: stationary certificate fails");
  if (!(var.t_o > 1.0)) throw NotStable("stationary_gap_experiment: no certified t_o > 1");

  SolveOptions sopt;
  sopt.tol = opt.tol;
  sopt.max_iter = opt.max_iter;
  StationarySolution fixed = solve_stationary(m, tau0, sopt);
  FiniteHorizonSolution flow = solve_finite_horizon(m, tau0, T_big, sopt);

  StationaryGapReport rep;
  rep.t_star = var.r_star > 1.0 ? var.r_star : var.t_o;
  rep.envelope_base = 0.0;
  double rho_b = rho_B(prof, rep.t_star, Variant::A);
  for (int i = 0; i < prof.n_pops(); ++i) {
    const std::size_t k = static_cast<std::size_t>(i);
    rep.envelope_base = std::max(rep.envelope_base, (prof.K[k] + prof.a[k]) / (1.0 - rho_b));
  }
  const std::size_t t_hi = T_big / 2;
  for (std::size_t k : k_list) {
    StationaryGapRow row;
    row.k = k;
    for (std::size_t t = k; t <= t_hi && t < flow.flow.horizon(); ++t)
      for (int i = 0; i < m.n_pops(); ++i)
        row.g = std::max(row.g, l1_dist(flow.flow.data[t][static_cast<std::size_t>(i)],
                                        fixed.measure[static_cast<std::size_t>(i)]));
    rep.rows.push_back(row);
  }
  for (std::size_t idx = 0; idx + 1 < rep.rows.size(); ++idx) {
    double g0 = rep.rows[idx].g, g1 = rep.rows[idx + 1].g;
    if (g0 <= 0.0 || g1 <= 0.0) continue;
    double dk = static_cast<double>(rep.rows[idx + 1].k - rep.rows[idx].k);
    if (dk <= 0) continue;
    rep.max_envelope_ratio = std::max(rep.max_envelope_ratio, std::pow(g1 / g0, 1.0 / dk));
  }
  return rep;
}

}  // namespace mfgc
