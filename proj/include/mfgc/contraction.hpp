#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "mfgc/common.hpp"
#include "mfgc/matrix.hpp"
#include "mfgc/model.hpp"
#include "mfgc/spectral.hpp"

namespace mfgc {

// The majorant summand circulates in two algebraic forms. They coincide at
// r = 1 and differ by a_i (r-1) / (r (1 - beta_i r)) per row elsewhere.
// Variant A is the expression the geometric test-vector computation actually
// produces, so it is the certificate default; variant B is reported alongside.
enum class Variant { A, B };

inline const char* variant_name(Variant v) { return v == Variant::A ? "A" : "B"; }

// v_i(r) of B(r) = D(r) + 1 v(r)^T
inline double majorant_v(const LipschitzProfile& p, int i, double r, Variant variant) {
  const std::size_t k = static_cast<std::size_t>(i);
  if (variant == Variant::A) return (p.K[k] + p.a[k]) / r + p.a[k] * p.beta[k] / (1.0 - p.beta[k] * r);
  return p.K[k] / r + p.a[k] / (1.0 - p.beta[k] * r);
}

inline double majorant_d(const LipschitzProfile& p, int i, double r) {
  const std::size_t k = static_cast<std::size_t>(i);
  return (p.Kbar[k] - p.K[k]) / r;
}

// N x N stationary contraction matrix: diagonal Kbar_i + a_i/(1-beta_i),
// off-diagonal K_i + a_i/(1-beta_i).
inline Matrix stationary_matrix(const LipschitzProfile& p) {
  const int N = p.n_pops();
  Matrix m(static_cast<std::size_t>(N), static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) {
    const std::size_t k = static_cast<std::size_t>(i);
    double tail = p.a[k] / (1.0 - p.beta[k]);
    for (int j = 0; j < N; ++j) m(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = tail + (i == j ? p.Kbar[k] : p.K[k]);
  }
  return m;
}

struct StationaryCertificate {
  double sum = 0.0;
  bool certified = false;
  double margin = 0.0;  // 1 - sum
  std::string reason;
};

// closed form: rho(M) < 1 iff sum_i (K_i + a_i/(1-beta_i)) / (1-(Kbar_i-K_i)) < 1
inline StationaryCertificate stationary_certificate(const LipschitzProfile& p) {
  StationaryCertificate out;
  for (int i = 0; i < p.n_pops(); ++i) {
    const std::size_t k = static_cast<std::size_t>(i);
    if (p.Kbar[k] - p.K[k] >= 1.0) {
      out.certified = false;
      out.sum = std::numeric_limits<double>::infinity();
      out.margin = -std::numeric_limits<double>::infinity();
      out.reason = "denominator nonpositive: Kbar_" + std::to_string(i) + " - K_" + std::to_string(i) + " >= 1";
      return out;
    }
  }
  double s = 0.0;
  for (int i = 0; i < p.n_pops(); ++i) {
    const std::size_t k = static_cast<std::size_t>(i);
    s += (p.K[k] + p.a[k] / (1.0 - p.beta[k])) / (1.0 - (p.Kbar[k] - p.K[k]));
  }
  out.sum = s;
  out.certified = s < 1.0;
  out.margin = 1.0 - s;
  return out;
}

// ---------------------------------------------------------------------------
// Finite-horizon block matrix S_T.
//
// Per-population block template, (T-1) x (T-1), 1-based indices (k,l):
//   l >= k    : a_i beta_i^{l-k+1}
//   l == k-1  : x + a_i
//   otherwise : 0
// Diagonal blocks use x = Kbar_i, off-diagonal blocks x = K_i; the block row
// fixes the population whose constants appear.
// ---------------------------------------------------------------------------

inline Matrix build_ST(const LipschitzProfile& p, std::size_t T) {
  if (T < 2) throw DomainError("build_ST requires T >= 2");
  const std::size_t N = static_cast<std::size_t>(p.n_pops());
  const std::size_t n = T - 1;
  if (N * n > 20000) throw SizeLimit("build_ST: dimension " + std::to_string(N * n) + " exceeds 20000");
  Matrix s(N * n, N * n, 0.0);
  for (std::size_t i = 0; i < N; ++i) {
    double a = p.a[i], b = p.beta[i];
    for (std::size_t j = 0; j < N; ++j) {
      double x = (i == j) ? p.Kbar[i] : p.K[i];
      for (std::size_t k = 1; k <= n; ++k) {
        if (k >= 2) s(i * n + k - 1, j * n + k - 2) = x + a;
        double pw = b;
        for (std::size_t l = k; l <= n; ++l) {
          s(i * n + k - 1, j * n + l - 1) = a * pw;
          pw *= b;
        }
      }
    }
  }
  return s;
}

// S_T * v in O(N T) using geometric suffix accumulators for the beta tails.
inline std::vector<double> st_matvec(const LipschitzProfile& p, std::size_t T, const std::vector<double>& v) {
  const std::size_t N = static_cast<std::size_t>(p.n_pops());
  const std::size_t n = T - 1;
  if (v.size() != N * n) throw DomainError("st_matvec: vector length mismatch");
  std::vector<double> s(n, 0.0);  // aggregate over populations per time index
  for (std::size_t j = 0; j < N; ++j)
    for (std::size_t t = 0; t < n; ++t) s[t] += v[j * n + t];
  std::vector<double> out(N * n, 0.0);
  std::vector<double> w(n, 0.0);
  for (std::size_t i = 0; i < N; ++i) {
    double a = p.a[i], b = p.beta[i];
    double delta = p.Kbar[i] - p.K[i];
    // w[k] = sum_{t>=k} beta^{t-k} s[t]
    w[n - 1] = s[n - 1];
    for (std::size_t k = n - 1; k-- > 0;) w[k] = s[k] + b * w[k + 1];
    out[i * n] = a * b * w[0];
    for (std::size_t k = 1; k < n; ++k)
      out[i * n + k] = delta * v[i * n + k - 1] + p.K[i] * s[k - 1] + a * w[k - 1];
  }
  return out;
}

// S_T^T * u, same cost, with forward accumulators.
inline std::vector<double> st_tmatvec(const LipschitzProfile& p, std::size_t T, const std::vector<double>& u) {
  const std::size_t N = static_cast<std::size_t>(p.n_pops());
  const std::size_t n = T - 1;
  if (u.size() != N * n) throw DomainError("st_tmatvec: vector length mismatch");
  // h[l] = sum_m a_m beta_m g_m(l), g_m(l) = sum_{i<=l} beta_m^{l-i} u_m(i)
  std::vector<double> h(n, 0.0), q(n, 0.0);
  for (std::size_t m = 0; m < N; ++m) {
    double a = p.a[m], b = p.beta[m];
    double g = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
      g = u[m * n + l] + b * g;
      h[l] += a * b * g;
      q[l] += (p.K[m] + p.a[m]) * u[m * n + l];
    }
  }
  std::vector<double> out(N * n, 0.0);
  for (std::size_t j = 0; j < N; ++j) {
    double delta = p.Kbar[j] - p.K[j];
    for (std::size_t l = 0; l < n; ++l) {
      double val = h[l];
      if (l + 1 < n) val += q[l + 1] + delta * u[j * n + l + 1];
      out[j * n + l] = val;
    }
  }
  return out;
}

inline MatVec st_operator(LipschitzProfile p, std::size_t T) {
  return [p = std::move(p), T](const std::vector<double>& v) { return st_matvec(p, T, v); };
}

// rho(S_T) through the structured matvec; shift mode covers a_i = 0 rows.
inline double rho_ST(const LipschitzProfile& p, std::size_t T, const PerronOptions& opt = {}) {
  const std::size_t dim = static_cast<std::size_t>(p.n_pops()) * (T - 1);
  bool primitive = true;
  for (double a : p.a) primitive = primitive && a > 0.0;
  MatVec op = st_operator(p, T);
  PerronResult res = primitive ? perron(op, dim, opt) : perron_shifted(op, dim, opt);
  return res.rho;
}

// ---------------------------------------------------------------------------
// Majorant B(r) = D(r) + 1 v(r)^T
// ---------------------------------------------------------------------------

inline Matrix build_B(const LipschitzProfile& p, double r, Variant variant) {
  const int N = p.n_pops();
  Matrix b(static_cast<std::size_t>(N), static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      b(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) =
          majorant_v(p, j, r, variant) + (i == j ? majorant_d(p, i, r) : 0.0);
  return b;
}

inline void check_r_in_B_domain(const LipschitzProfile& p, double r) {
  if (!(r > 0.0) || !(r < 1.0 / p.beta_max)) throw DomainError("r outside (0, 1/beta_max)");
}

// rho(B(r)) as the unique root e > max_i d_i of sum_i v_i/(e - d_i) = 1;
// rows with v_i = 0 contribute their diagonal d_i directly.
inline double rho_B(const LipschitzProfile& p, double r, Variant variant) {
  check_r_in_B_domain(p, r);
  const int N = p.n_pops();
  double dmax = 0.0, vsum = 0.0, dmax_pos = -std::numeric_limits<double>::infinity();
  std::vector<double> v(static_cast<std::size_t>(N)), d(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) {
    v[static_cast<std::size_t>(i)] = majorant_v(p, i, r, variant);
    d[static_cast<std::size_t>(i)] = majorant_d(p, i, r);
    dmax = std::max(dmax, d[static_cast<std::size_t>(i)]);
    vsum += v[static_cast<std::size_t>(i)];
    if (v[static_cast<std::size_t>(i)] > 0.0) dmax_pos = std::max(dmax_pos, d[static_cast<std::size_t>(i)]);
  }
  if (vsum == 0.0) return dmax;
  auto f = [&](double e) {
    double s = 0.0;
    for (int i = 0; i < N; ++i)
      if (v[static_cast<std::size_t>(i)] > 0.0) s += v[static_cast<std::size_t>(i)] / (e - d[static_cast<std::size_t>(i)]);
    return s;
  };
  double lo = dmax_pos * (1.0 + 1e-15) + 1e-300;
  double hi = dmax_pos + vsum;
  while (f(hi) > 1.0) hi = dmax_pos + (hi - dmax_pos) * 2.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (f(mid) > 1.0)
      lo = mid;
    else
      hi = mid;
  }
  return std::max(0.5 * (lo + hi), dmax);
}

// residual of the secular identity at (r, rho(B(r))); diagnostics only
inline double secular_residual(const LipschitzProfile& p, double r, Variant variant) {
  double rho = rho_B(p, r, variant);
  double s = 0.0;
  for (int i = 0; i < p.n_pops(); ++i) s += majorant_v(p, i, r, variant) / (rho - majorant_d(p, i, r));
  return std::abs(s - 1.0);
}

// Right Perron vector of D + 1 v^T in closed form: c_i = k/(rho - d_i). This
// is the weight vector whose geometric ladder majorizes S_T^T.
inline std::vector<double> majorant_right_perron(const LipschitzProfile& p, double r, Variant variant) {
  double rho = rho_B(p, r, variant);
  std::vector<double> c(static_cast<std::size_t>(p.n_pops()));
  for (int i = 0; i < p.n_pops(); ++i) c[static_cast<std::size_t>(i)] = 1.0 / (rho - majorant_d(p, i, r));
  double c0 = c[0];
  for (auto& x : c) x /= c0;
  return c;
}

// Left Perron vector of D + 1 v^T: c_i = k v_i/(rho - d_i). Feeds the forward
// geometric Collatz-Wielandt test vectors.
inline std::vector<double> majorant_left_perron(const LipschitzProfile& p, double r, Variant variant) {
  double rho = rho_B(p, r, variant);
  std::vector<double> c(static_cast<std::size_t>(p.n_pops()));
  for (int i = 0; i < p.n_pops(); ++i)
    c[static_cast<std::size_t>(i)] = majorant_v(p, i, r, variant) / (rho - majorant_d(p, i, r));
  double mx = *std::max_element(c.begin(), c.end());
  if (mx > 0.0)
    for (auto& x : c) x /= mx;
  return c;
}

// ---------------------------------------------------------------------------
// Variational contraction function V and its minimization
// ---------------------------------------------------------------------------

struct RInterval {
  double lo = 0.0;  // Kbar_inf
  double hi = 0.0;  // 1/beta_max
  bool empty() const { return !(lo < hi); }
  bool contains(double r) const { return r > lo && r < hi; }
};

inline RInterval r_interval(const LipschitzProfile& p) { return {p.Kbar_inf, 1.0 / p.beta_max}; }

inline double variational_V(const LipschitzProfile& p, double r, Variant variant) {
  RInterval iv = r_interval(p);
  if (!iv.contains(r)) throw DomainError("variational_V: r outside (Kbar_inf, 1/beta_max)");
  double s = 0.0;
  for (int i = 0; i < p.n_pops(); ++i) s += majorant_v(p, i, r, variant) / (1.0 - majorant_d(p, i, r));
  return s;
}

enum class Regime { AsymptoticallyStationary, Stable, Unstable, NotCertified };

inline const char* regime_name(Regime r) {
  switch (r) {
    case Regime::AsymptoticallyStationary: return "asymptotically_stationary";
    case Regime::Stable: return "stable";
    case Regime::Unstable: return "unstable";
    default: return "not_certified";
  }
}

struct VariationalResult {
  double r_star = 0.0;
  double v_star = std::numeric_limits<double>::infinity();
  bool certified = false;
  Regime regime = Regime::NotCertified;
  std::string reason;
  double v_at_one = std::numeric_limits<double>::quiet_NaN();
  bool one_in_interval = false;
  double t_o = 0.0;  // largest grid r > 1 with V(r) < 1; 0 if none
};

namespace detail {

inline std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  std::vector<double> g(n);
  double llo = std::log(lo), lhi = std::log(hi);
  for (std::size_t k = 0; k < n; ++k) g[k] = std::exp(llo + (lhi - llo) * static_cast<double>(k) / static_cast<double>(n - 1));
  return g;
}

template <typename Fn>
inline double golden_refine(Fn&& f, double lo, double hi, double tol) {
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = hi - gr * (hi - lo);
  double d = lo + gr * (hi - lo);
  double fc = f(c), fd = f(d);
  while (hi - lo > tol) {
    if (fc < fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - gr * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + gr * (hi - lo);
      fd = f(d);
    }
  }
  return 0.5 * (lo + hi);
}

// grid-then-golden minimizer of f over the open interval (lo, hi); f is
// smooth but not proven unimodal, the grid guards the refinement bracket
template <typename Fn>
inline std::pair<double, double> grid_minimize(Fn&& f, double lo, double hi, std::size_t grid_n, double r_tol) {
  double lo_eff = std::max(lo * (1.0 + 1e-9), hi * 1e-8);
  double hi_eff = hi * (1.0 - 1e-9);
  if (!(lo_eff < hi_eff)) lo_eff = hi_eff = std::sqrt(std::max(lo, hi * 1e-8) * hi);  // razor-thin interval
  std::vector<double> grid = log_grid(lo_eff, hi_eff, grid_n);
  std::size_t best = 0;
  double fbest = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    double v = f(grid[k]);
    if (v < fbest) {
      fbest = v;
      best = k;
    }
  }
  double blo = grid[best > 0 ? best - 1 : best];
  double bhi = grid[best + 1 < grid.size() ? best + 1 : best];
  double r = blo < bhi ? golden_refine(f, blo, bhi, r_tol) : grid[best];
  double fr = f(r);
  if (fbest < fr) return {grid[best], fbest};
  return {r, fr};
}

}  // namespace detail

struct MinimizeVOptions {
  std::size_t grid = 2048;
  double r_tol = 1e-10;
};

inline VariationalResult minimize_V(const LipschitzProfile& p, Variant variant, const MinimizeVOptions& opt = {}) {
  VariationalResult out;
  RInterval iv = r_interval(p);
  if (iv.empty()) {
    out.reason = "empty r-interval: Kbar_inf >= 1/beta_max";
    return out;
  }
  auto f = [&](double r) { return variational_V(p, r, variant); };
  double lo_eff = std::max(iv.lo * (1.0 + 1e-9), iv.hi * 1e-8);
  double hi_eff = iv.hi * (1.0 - 1e-9);
  if (!(lo_eff < hi_eff)) lo_eff = hi_eff = std::sqrt(iv.lo * iv.hi);  // razor-thin interval
  std::vector<double> grid = detail::log_grid(lo_eff, hi_eff, opt.grid);
  std::size_t best = 0;
  double fbest = std::numeric_limits<double>::infinity();
  bool stable_grid = false;
  double t_o = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    double v = f(grid[k]);
    if (v < fbest) {
      fbest = v;
      best = k;
    }
    if (grid[k] > 1.0 && v < 1.0) {
      stable_grid = true;
      t_o = std::max(t_o, grid[k]);
    }
  }
  double blo = grid[best > 0 ? best - 1 : best];
  double bhi = grid[best + 1 < grid.size() ? best + 1 : best];
  out.r_star = blo < bhi ? detail::golden_refine(f, blo, bhi, opt.r_tol) : grid[best];
  out.v_star = f(out.r_star);
  if (fbest < out.v_star) {
    out.r_star = grid[best];
    out.v_star = fbest;
  }
  out.one_in_interval = iv.contains(1.0);
  if (out.one_in_interval) out.v_at_one = f(1.0);
  out.certified = out.v_star < 1.0;
  out.t_o = t_o;
  if (!out.certified) {
    out.regime = Regime::NotCertified;
    out.reason = "inf V >= 1";
  } else if (out.one_in_interval && out.v_at_one < 1.0) {
    out.regime = Regime::AsymptoticallyStationary;
  } else if (stable_grid) {
    out.regime = Regime::Stable;
  } else {
    out.regime = Regime::Unstable;
  }
  return out;
}

// inf_r rho(B(r)) over (0, 1/beta_max), grid plus golden refinement
inline std::pair<double, double> minimize_rho_B(const LipschitzProfile& p, Variant variant,
                                                const MinimizeVOptions& opt = {}) {
  double hi = 1.0 / p.beta_max;
  auto f = [&](double r) { return rho_B(p, r, variant); };
  auto [r, v] = detail::grid_minimize(f, hi * 1e-8, hi, opt.grid, opt.r_tol);
  return {r, v};
}

// ---------------------------------------------------------------------------
// Limit consistency: rho(S_T) increases to inf_r rho(B(r))
// ---------------------------------------------------------------------------

struct LimitScanRow {
  std::size_t T = 0;
  double rho_st = 0.0;
  double gap = 0.0;  // inf_r rho(B(r)) - rho(S_T)
};

struct LimitScan {
  std::vector<LimitScanRow> rows;
  double inf_rho_b = 0.0;
  double r_at_inf = 0.0;
};

inline LimitScan limit_consistency_scan(const LipschitzProfile& p, const std::vector<std::size_t>& T_list,
                                        Variant variant = Variant::A) {
  LimitScan scan;
  auto [r, inf_b] = minimize_rho_B(p, variant);
  scan.inf_rho_b = inf_b;
  scan.r_at_inf = r;
  double prev = -std::numeric_limits<double>::infinity();
  for (std::size_t T : T_list) {
    LimitScanRow row;
    row.T = T;
    row.rho_st = rho_ST(p, T);
    row.gap = inf_b - row.rho_st;
    if (row.rho_st < prev - 1e-10)
      throw Error("limit_consistency_scan: rho(S_T) decreased at T=" + std::to_string(T));
    if (row.gap < -1e-10) throw Error("limit_consistency_scan: majorant gap negative at T=" + std::to_string(T));
    prev = row.rho_st;
    scan.rows.push_back(row);
  }
  return scan;
}

// ---------------------------------------------------------------------------
// Constraint equation roots (z-form of the secular identity)
// ---------------------------------------------------------------------------

// G(z) = sum_i (K_i z + a_i z/(z-beta_i)) / (lambda - (Kbar_i - K_i) z) - 1
// scanned over (beta_max, lambda/max_j(Kbar_j - K_j)); every sign change is
// bisected. G is not proven monotone, all roots are reported.
inline std::vector<double> constraint_roots(const LipschitzProfile& p, double lambda,
                                            Variant variant = Variant::B, std::size_t grid_n = 4096) {
  const int N = p.n_pops();
  double dmax = p.Kbar_inf;
  if (dmax <= 0.0) return {};  // all K_i = 0: G == -1, no roots
  if (!(lambda > 0.0)) throw DomainError("constraint_roots: lambda must be positive");
  double zhi = lambda / dmax;
  double zlo = p.beta_max;
  if (zlo >= zhi) throw EmptyInterval("constraint_roots: beta_max >= lambda/max(Kbar-K)");
  auto G = [&](double z) {
    double s = 0.0;
    for (int i = 0; i < N; ++i) {
      const std::size_t k = static_cast<std::size_t>(i);
      double num = (variant == Variant::B) ? p.K[k] * z + p.a[k] * z / (z - p.beta[k])
                                           : (p.K[k] + p.a[k]) * z + p.a[k] * p.beta[k] * z / (z - p.beta[k]);
      s += num / (lambda - (p.Kbar[k] - p.K[k]) * z);
    }
    return s - 1.0;
  };
  double inset = (zhi - zlo) * 1e-9;
  double a = zlo + inset, b = zhi - inset;
  std::vector<double> roots;
  double prev_z = a, prev_g = G(a);
  for (std::size_t k = 1; k < grid_n; ++k) {
    double z = a + (b - a) * static_cast<double>(k) / static_cast<double>(grid_n - 1);
    double g = G(z);
    if (prev_g == 0.0) {
      roots.push_back(prev_z);
    } else if ((prev_g < 0.0) != (g < 0.0)) {
      double lo = prev_z, hi = z, glo = prev_g;
      while (hi - lo > 1e-12) {
        double mid = 0.5 * (lo + hi);
        double gm = G(mid);
        if ((gm < 0.0) == (glo < 0.0)) {
          lo = mid;
          glo = gm;
        } else {
          hi = mid;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    prev_z = z;
    prev_g = g;
  }
  return roots;
}

// ---------------------------------------------------------------------------
// Perron-ratio diagnostic on S_T
// ---------------------------------------------------------------------------

struct PerronRatioDiagnostic {
  double rho_st = 0.0;
  std::vector<std::vector<double>> ratios;        // per pop: u_i(k+1)/u_i(k)
  std::vector<std::vector<double>> cross_ratios;  // per pop i>0: u_i(k)/u_0(k)
  double tail_estimate = 0.0;                     // mean consecutive ratio, middle third
  double ratio_spread = 0.0;                      // max relative spread of per-pop ratios (middle third)
  double cross_spread = 0.0;                      // max relative spread of cross ratios (middle third)
};

inline PerronRatioDiagnostic perron_ratio_diagnostic(const LipschitzProfile& p, std::size_t T,
                                                     const PerronOptions& opt = {}) {
  if (T < 50) throw DomainError("perron_ratio_diagnostic requires T >= 50");
  const std::size_t N = static_cast<std::size_t>(p.n_pops());
  const std::size_t n = T - 1;
  bool primitive = true;
  for (double a : p.a) primitive = primitive && a > 0.0;
  MatVec op = st_operator(p, T);
  PerronResult res = primitive ? perron(op, N * n, opt) : perron_shifted(op, N * n, opt);
  PerronRatioDiagnostic diag;
  diag.rho_st = res.rho;
  diag.ratios.assign(N, {});
  for (std::size_t i = 0; i < N; ++i) {
    diag.ratios[i].resize(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k) diag.ratios[i][k] = res.vector[i * n + k + 1] / res.vector[i * n + k];
  }
  for (std::size_t i = 1; i < N; ++i) {
    std::vector<double> cr(n);
    for (std::size_t k = 0; k < n; ++k) cr[k] = res.vector[i * n + k] / res.vector[k];
    diag.cross_ratios.push_back(std::move(cr));
  }
  const std::size_t m0 = (n - 1) / 3, m1 = 2 * (n - 1) / 3;
  double mean = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < N; ++i) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t k = m0; k < m1; ++k) {
      double v = diag.ratios[i][k];
      mean += v;
      ++count;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    diag.ratio_spread = std::max(diag.ratio_spread, (hi - lo) / (0.5 * (hi + lo)));
  }
  diag.tail_estimate = mean / static_cast<double>(count);
  for (const auto& cr : diag.cross_ratios) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t k = m0; k < m1; ++k) {
      lo = std::min(lo, cr[k]);
      hi = std::max(hi, cr[k]);
    }
    diag.cross_spread = std::max(diag.cross_spread, (hi - lo) / (0.5 * (hi + lo)));
  }
  return diag;
}

}  // namespace mfgc
