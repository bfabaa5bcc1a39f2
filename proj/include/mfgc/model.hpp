#pragma once

#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "mfgc/common.hpp"

namespace mfgc {

// c(x,a,tau) = c0[x][a] + sum_j sum_y w[j][x][a][y] * tau_j(y)
struct AffineCost {
  // c0 flattened [x][a], w flattened [j][x][a][y]
  std::vector<double> c0;
  std::vector<double> w;
};

struct CustomCost {
  std::function<double(int x, int a, const MeasureSlice& tau)> eval;
  double declared_L = 0.0;
  double declared_bound = 0.0;  // uniform bound M
};

struct CostModel {
  enum class Kind { AffineInMeasure, Custom };
  Kind kind = Kind::AffineInMeasure;
  AffineCost affine;
  CustomCost custom;
};

// p(.|x,a,tau) = (1-eps) p0[x][a][.] + eps * sum_j lambda[j] * (tau_j M_j)
// Rows of each mixing matrix are distributions over next states.
struct MixtureKernel {
  std::vector<double> p0;       // [x][a][y]
  double epsilon = 0.0;         // in [0,1]
  std::vector<double> mix;      // [j][y][y']
  std::vector<double> lambda;   // [j], convex weights
};

struct CustomKernel {
  std::function<Dist(int x, int a, const MeasureSlice& tau)> eval;
  double declared_K = 0.0;
};

struct KernelModel {
  enum class Kind { MixtureInMeasure, Custom };
  Kind kind = Kind::MixtureInMeasure;
  MixtureKernel mixture;
  CustomKernel custom;
};

struct PopulationSpec {
  double beta = 0.9;  // discount, in (0,1)
  double rho = 1.0;   // regularization weight, > 0
  CostModel cost;
  KernelModel kernel;
};

// Time-indexed family of per-population state distributions; data[t][i][x].
struct StateMeasureFlow {
  std::vector<MeasureSlice> data;

  std::size_t horizon() const { return data.size(); }

  bool valid(double tol = 1e-10) const {
    for (const auto& slice : data)
      for (const auto& d : slice)
        if (!is_distribution(d, tol)) return false;
    return true;
  }
};

class MfgModel {
 public:
  MfgModel(int n_states, int n_actions, std::vector<PopulationSpec> populations)
      : nx_(n_states), na_(n_actions), pops_(std::move(populations)) {}

  int n_pops() const { return static_cast<int>(pops_.size()); }
  int n_states() const { return nx_; }
  int n_actions() const { return na_; }
  const PopulationSpec& pop(int i) const { return pops_[static_cast<std::size_t>(i)]; }
  PopulationSpec& pop(int i) { return pops_[static_cast<std::size_t>(i)]; }

  double cost(int i, int x, int a, const MeasureSlice& tau) const {
    const CostModel& c = pops_[static_cast<std::size_t>(i)].cost;
    if (c.kind == CostModel::Kind::Custom) return c.custom.eval(x, a, tau);
    const int N = n_pops();
    double v = c.affine.c0[static_cast<std::size_t>(x * na_ + a)];
    for (int j = 0; j < N; ++j) {
      const double* wrow = cost_w_row(i, j, x, a);
      for (int y = 0; y < nx_; ++y) v += wrow[y] * tau[static_cast<std::size_t>(j)][static_cast<std::size_t>(y)];
    }
    return v;
  }

  Dist kernel(int i, int x, int a, const MeasureSlice& tau) const {
    Dist out(static_cast<std::size_t>(nx_), 0.0);
    Dist mixpart = kernel_mix_part(i, tau);
    kernel_into(i, x, a, tau, mixpart, out);
    return out;
  }

  // The measure-mixture component is shared by all (x,a); callers doing full
  // sweeps compute it once per (i,tau).
  Dist kernel_mix_part(int i, const MeasureSlice& tau) const {
    const KernelModel& k = pops_[static_cast<std::size_t>(i)].kernel;
    Dist part(static_cast<std::size_t>(nx_), 0.0);
    if (k.kind == KernelModel::Kind::Custom) return part;  // unused
    const int N = n_pops();
    for (int j = 0; j < N; ++j) {
      double lj = k.mixture.epsilon * k.mixture.lambda[static_cast<std::size_t>(j)];
      if (lj == 0.0) continue;
      const double* M = &k.mixture.mix[static_cast<std::size_t>(j) * static_cast<std::size_t>(nx_ * nx_)];
      const Dist& tj = tau[static_cast<std::size_t>(j)];
      for (int y = 0; y < nx_; ++y) {
        double ty = tj[static_cast<std::size_t>(y)];
        if (ty == 0.0) continue;
        const double* row = M + static_cast<std::size_t>(y * nx_);
        for (int y2 = 0; y2 < nx_; ++y2) part[static_cast<std::size_t>(y2)] += lj * ty * row[y2];
      }
    }
    return part;
  }

  void kernel_into(int i, int x, int a, const MeasureSlice& tau, const Dist& mixpart, Dist& out) const {
    const KernelModel& k = pops_[static_cast<std::size_t>(i)].kernel;
    if (k.kind == KernelModel::Kind::Custom) {
      out = k.custom.eval(x, a, tau);
      return;
    }
    const double* base = &k.mixture.p0[static_cast<std::size_t>((x * na_ + a) * nx_)];
    const double keep = 1.0 - k.mixture.epsilon;
    for (int y = 0; y < nx_; ++y) out[static_cast<std::size_t>(y)] = keep * base[y] + mixpart[static_cast<std::size_t>(y)];
  }

  const double* cost_w_row(int i, int j, int x, int a) const {
    const AffineCost& c = pops_[static_cast<std::size_t>(i)].cost.affine;
    return &c.w[static_cast<std::size_t>(((j * nx_ + x) * na_ + a) * nx_)];
  }

 private:
  int nx_;
  int na_;
  std::vector<PopulationSpec> pops_;
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool valid() const { return violations.empty(); }
};

namespace detail {

inline std::string fmt_idx(int i, int x, int a) {
  std::ostringstream os;
  os << "(i=" << i << ",x=" << x << ",a=" << a << ")";
  return os.str();
}

// Vertices of the product simplex, one state index per population.
inline MeasureSlice vertex_slice(int N, int nx, const std::vector<int>& ys) {
  MeasureSlice tau(static_cast<std::size_t>(N), Dist(static_cast<std::size_t>(nx), 0.0));
  for (int j = 0; j < N; ++j) tau[static_cast<std::size_t>(j)][static_cast<std::size_t>(ys[static_cast<std::size_t>(j)])] = 1.0;
  return tau;
}

template <typename Fn>
inline void for_each_vertex(int N, int nx, std::size_t cap, Fn&& fn) {
  std::vector<int> ys(static_cast<std::size_t>(N), 0);
  std::size_t count = 0;
  while (true) {
    fn(ys);
    if (++count >= cap) return;
    int j = 0;
    while (j < N) {
      if (++ys[static_cast<std::size_t>(j)] < nx) break;
      ys[static_cast<std::size_t>(j)] = 0;
      ++j;
    }
    if (j == N) return;
  }
}

}  // namespace detail

inline ValidationReport validate_model(const MfgModel& m) {
  ValidationReport rep;
  auto flag = [&rep](const std::string& s) { rep.violations.push_back(s); };
  const int N = m.n_pops(), nx = m.n_states(), na = m.n_actions();
  if (N < 1) flag("n_pops must be >= 1");
  if (nx < 1) flag("n_states must be >= 1");
  if (na < 1) flag("n_actions must be >= 1");
  const double kernel_tol = 1e-12;

  for (int i = 0; i < N; ++i) {
    const PopulationSpec& p = m.pop(i);
    if (!(p.beta > 0.0 && p.beta < 1.0)) {
      std::ostringstream os;
      os << "beta[" << i << "]=" << p.beta << " outside (0,1)";
      flag(os.str());
    }
    if (!(p.rho > 0.0)) {
      std::ostringstream os;
      os << "rho[" << i << "]=" << p.rho << " must be > 0";
      flag(os.str());
    }

    if (p.cost.kind == CostModel::Kind::AffineInMeasure) {
      const AffineCost& c = p.cost.affine;
      if (c.c0.size() != static_cast<std::size_t>(nx * na)) flag("cost c0 shape mismatch for population " + std::to_string(i));
      if (c.w.size() != static_cast<std::size_t>(N * nx * na * nx)) flag("cost w shape mismatch for population " + std::to_string(i));
      if (rep.valid()) {
        // affine in tau: extremes over the product simplex sit on vertices,
        // and each population contributes its own min/max independently
        for (int x = 0; x < nx; ++x)
          for (int a = 0; a < na; ++a) {
            double lo = c.c0[static_cast<std::size_t>(x * na + a)];
            for (int j = 0; j < N; ++j) {
              const double* row = m.cost_w_row(i, j, x, a);
              lo += *std::min_element(row, row + nx);
            }
            if (lo < 0.0) {
              std::ostringstream os;
              os << "cost " << detail::fmt_idx(i, x, a) << " attains negative value " << lo << " on a simplex vertex";
              flag(os.str());
            }
          }
      }
    } else {
      if (!p.cost.custom.eval) flag("custom cost callback missing for population " + std::to_string(i));
    }

    if (p.kernel.kind == KernelModel::Kind::MixtureInMeasure) {
      const MixtureKernel& k = p.kernel.mixture;
      if (!(k.epsilon >= 0.0 && k.epsilon <= 1.0)) flag("kernel epsilon outside [0,1] for population " + std::to_string(i));
      if (k.p0.size() != static_cast<std::size_t>(nx * na * nx)) flag("kernel p0 shape mismatch for population " + std::to_string(i));
      if (k.mix.size() != static_cast<std::size_t>(N * nx * nx)) flag("kernel mix shape mismatch for population " + std::to_string(i));
      if (k.lambda.size() != static_cast<std::size_t>(N)) flag("kernel lambda shape mismatch for population " + std::to_string(i));
      if (rep.valid()) {
        for (int x = 0; x < nx; ++x)
          for (int a = 0; a < na; ++a) {
            const double* row = &k.p0[static_cast<std::size_t>((x * na + a) * nx)];
            double s = 0.0;
            bool neg = false;
            for (int y = 0; y < nx; ++y) {
              s += row[y];
              neg = neg || row[y] < 0.0;
            }
            if (neg) flag("kernel p0 row " + detail::fmt_idx(i, x, a) + " has a negative entry");
            if (std::abs(s - 1.0) > kernel_tol) {
              std::ostringstream os;
              os << "kernel p0 row " << detail::fmt_idx(i, x, a) << " sums to " << s << " (deficit " << (1.0 - s) << ")";
              flag(os.str());
            }
          }
        for (int j = 0; j < N; ++j)
          for (int y = 0; y < nx; ++y) {
            const double* row = &k.mix[static_cast<std::size_t>((j * nx + y) * nx)];
            double s = 0.0;
            bool neg = false;
            for (int y2 = 0; y2 < nx; ++y2) {
              s += row[y2];
              neg = neg || row[y2] < 0.0;
            }
            if (neg || std::abs(s - 1.0) > kernel_tol) {
              std::ostringstream os;
              os << "kernel mix row (i=" << i << ",j=" << j << ",y=" << y << ") is not a distribution (sum " << s << ")";
              flag(os.str());
            }
          }
        double ls = 0.0;
        bool lneg = false;
        for (double l : k.lambda) {
          ls += l;
          lneg = lneg || l < 0.0;
        }
        if (lneg || std::abs(ls - 1.0) > kernel_tol) flag("kernel lambda weights of population " + std::to_string(i) + " are not convex coefficients");
      }
    } else {
      if (!p.kernel.custom.eval) flag("custom kernel callback missing for population " + std::to_string(i));
    }
  }
  if (!rep.valid()) return rep;

  // sampled checks on vertices and the barycenter, exercising callbacks too
  MeasureSlice bary(static_cast<std::size_t>(N), uniform_dist(static_cast<std::size_t>(nx)));
  std::vector<MeasureSlice> probes{bary};
  detail::for_each_vertex(N, nx, 64, [&](const std::vector<int>& ys) { probes.push_back(detail::vertex_slice(N, nx, ys)); });
  for (int i = 0; i < N; ++i)
    for (const auto& tau : probes)
      for (int x = 0; x < nx; ++x)
        for (int a = 0; a < na; ++a) {
          double cv = m.cost(i, x, a, tau);
          if (!std::isfinite(cv) || cv < 0.0) flag("cost " + detail::fmt_idx(i, x, a) + " invalid on a probe measure");
          Dist row = m.kernel(i, x, a, tau);
          if (!is_distribution(row, kernel_tol)) {
            std::ostringstream os;
            os << "kernel row " << detail::fmt_idx(i, x, a) << " is not a probability vector on a probe measure (sum " << sum(row) << ")";
            flag(os.str());
          }
        }
  return rep;
}

// Primitive and derived Lipschitz data consumed by every certificate.
struct LipschitzProfile {
  std::vector<double> L;     // cost Lipschitz constants
  std::vector<double> K;     // kernel Lipschitz constants
  std::vector<double> beta;  // discounts
  std::vector<double> rho;   // regularization weights
  std::vector<double> M;     // uniform cost bounds

  // derived
  std::vector<double> Lbar;  // L / (1 - beta K / 2)
  std::vector<double> Kbar;  // (3/2)K + (1/2) Lbar K / (rho (1-beta))
  std::vector<double> a;     // Lbar K / rho
  double Kbar_inf = 0.0;     // max_j (Kbar_j - K_j)
  double beta_max = 0.0;

  // set for Custom models when random sampling exceeded the declared constants
  bool empirical_exceeds_declared = false;

  int n_pops() const { return static_cast<int>(L.size()); }

  void derive() {
    const std::size_t N = L.size();
    Lbar.assign(N, 0.0);
    Kbar.assign(N, 0.0);
    a.assign(N, 0.0);
    Kbar_inf = 0.0;
    beta_max = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      if (beta[i] * K[i] / 2.0 >= 1.0) {
        std::ostringstream os;
        os << "beta_i K_i / 2 = " << beta[i] * K[i] / 2.0 << " >= 1 for population " << i;
        throw DegenerateProfile(os.str());
      }
      Lbar[i] = L[i] / (1.0 - beta[i] * K[i] / 2.0);
      Kbar[i] = 1.5 * K[i] + 0.5 * Lbar[i] * K[i] / (rho[i] * (1.0 - beta[i]));
      a[i] = Lbar[i] * K[i] / rho[i];
      Kbar_inf = std::max(Kbar_inf, Kbar[i] - K[i]);
      beta_max = std::max(beta_max, beta[i]);
    }
  }

  static LipschitzProfile from_constants(std::vector<double> L, std::vector<double> K, std::vector<double> beta,
                                         std::vector<double> rho, std::vector<double> M = {}) {
    LipschitzProfile p;
    p.L = std::move(L);
    p.K = std::move(K);
    p.beta = std::move(beta);
    p.rho = std::move(rho);
    p.M = M.empty() ? std::vector<double>(p.L.size(), 1.0) : std::move(M);
    p.derive();
    return p;
  }
};

namespace detail {

// exact template constant from directional maxima; mixed flips never exceed
// the max of the single directions (triangle inequality through midpoints)
struct AffineSensitivity {
  double state = 0.0;    // |.| / 1 over x-flips
  double action = 0.0;   // |.| / 2 over a-flips
  double measure = 0.0;  // per unit of sum_j l1
  double constant() const { return std::max(state, std::max(action, measure)); }
};

inline AffineSensitivity affine_cost_sensitivity(const MfgModel& m, int i) {
  const int N = m.n_pops(), nx = m.n_states(), na = m.n_actions();
  const AffineCost& c = m.pop(i).cost.affine;
  AffineSensitivity s;
  auto pair_extreme = [&](int x1, int a1, int x2, int a2) {
    // max over product-simplex vertices of |c(x1,a1,tau) - c(x2,a2,tau)|
    double base = c.c0[static_cast<std::size_t>(x1 * na + a1)] - c.c0[static_cast<std::size_t>(x2 * na + a2)];
    double hi = base, lo = base;
    for (int j = 0; j < N; ++j) {
      const double* r1 = m.cost_w_row(i, j, x1, a1);
      const double* r2 = m.cost_w_row(i, j, x2, a2);
      double dmax = -std::numeric_limits<double>::infinity();
      double dmin = std::numeric_limits<double>::infinity();
      for (int y = 0; y < nx; ++y) {
        dmax = std::max(dmax, r1[y] - r2[y]);
        dmin = std::min(dmin, r1[y] - r2[y]);
      }
      hi += dmax;
      lo += dmin;
    }
    return std::max(std::abs(hi), std::abs(lo));
  };
  for (int a = 0; a < na; ++a)
    for (int x1 = 0; x1 < nx; ++x1)
      for (int x2 = x1 + 1; x2 < nx; ++x2) s.state = std::max(s.state, pair_extreme(x1, a, x2, a));
  for (int x = 0; x < nx; ++x)
    for (int a1 = 0; a1 < na; ++a1)
      for (int a2 = a1 + 1; a2 < na; ++a2) s.action = std::max(s.action, pair_extreme(x, a1, x, a2) / 2.0);
  // l1 Lipschitz constant of an affine map: attained on (e_y - e_y')/2
  for (int j = 0; j < N; ++j)
    for (int x = 0; x < nx; ++x)
      for (int a = 0; a < na; ++a) {
        const double* row = m.cost_w_row(i, j, x, a);
        double wmax = *std::max_element(row, row + nx);
        double wmin = *std::min_element(row, row + nx);
        s.measure = std::max(s.measure, (wmax - wmin) / 2.0);
      }
  return s;
}

inline AffineSensitivity mixture_kernel_sensitivity(const MfgModel& m, int i) {
  const int N = m.n_pops(), nx = m.n_states(), na = m.n_actions();
  const MixtureKernel& k = m.pop(i).kernel.mixture;
  AffineSensitivity s;
  auto row_dist = [&](int x1, int a1, int x2, int a2) {
    const double* r1 = &k.p0[static_cast<std::size_t>((x1 * na + a1) * nx)];
    const double* r2 = &k.p0[static_cast<std::size_t>((x2 * na + a2) * nx)];
    double d = 0.0;
    for (int y = 0; y < nx; ++y) d += std::abs(r1[y] - r2[y]);
    return (1.0 - k.epsilon) * d;
  };
  for (int a = 0; a < na; ++a)
    for (int x1 = 0; x1 < nx; ++x1)
      for (int x2 = x1 + 1; x2 < nx; ++x2) s.state = std::max(s.state, row_dist(x1, a, x2, a));
  for (int x = 0; x < nx; ++x)
    for (int a1 = 0; a1 < na; ++a1)
      for (int a2 = a1 + 1; a2 < na; ++a2) s.action = std::max(s.action, row_dist(x, a1, x, a2) / 2.0);
  // Dobrushin coefficient of each mixing matrix, weighted by eps*lambda_j
  for (int j = 0; j < N; ++j) {
    const double* M = &k.mix[static_cast<std::size_t>(j) * static_cast<std::size_t>(nx * nx)];
    double dob = 0.0;
    for (int y1 = 0; y1 < nx; ++y1)
      for (int y2 = y1 + 1; y2 < nx; ++y2) {
        double d = 0.0;
        for (int y = 0; y < nx; ++y) d += std::abs(M[y1 * nx + y] - M[y2 * nx + y]);
        dob = std::max(dob, d / 2.0);
      }
    s.measure = std::max(s.measure, k.epsilon * k.lambda[static_cast<std::size_t>(j)] * dob);
  }
  return s;
}

// empirical lower bound for declared-constant models, >= 10^4 random pairs
template <typename EvalDiff>
inline double empirical_template_constant(const MfgModel& m, Rng& rng, EvalDiff&& diff, int pairs = 10000) {
  const int N = m.n_pops(), nx = m.n_states(), na = m.n_actions();
  double best = 0.0;
  for (int s = 0; s < pairs; ++s) {
    int x1 = static_cast<int>(rng.index(static_cast<std::size_t>(nx)));
    int x2 = static_cast<int>(rng.index(static_cast<std::size_t>(nx)));
    int a1 = static_cast<int>(rng.index(static_cast<std::size_t>(na)));
    int a2 = static_cast<int>(rng.index(static_cast<std::size_t>(na)));
    MeasureSlice t1, t2;
    for (int j = 0; j < N; ++j) {
      t1.push_back(rng.simplex_point(static_cast<std::size_t>(nx)));
      t2.push_back(rng.simplex_point(static_cast<std::size_t>(nx)));
    }
    double denom = (x1 != x2 ? 1.0 : 0.0) + (a1 != a2 ? 2.0 : 0.0);
    for (int j = 0; j < N; ++j) denom += l1_dist(t1[static_cast<std::size_t>(j)], t2[static_cast<std::size_t>(j)]);
    if (denom < 1e-12) continue;
    best = std::max(best, diff(x1, a1, t1, x2, a2, t2) / denom);
  }
  return best;
}

}  // namespace detail

// Exact smallest template constants for the affine/mixture family; declared
// constants plus an empirical lower-bound estimate for Custom models.
inline LipschitzProfile estimate_lipschitz(const MfgModel& m, std::uint64_t sample_seed = 2024) {
  const int N = m.n_pops(), nx = m.n_states(), na = m.n_actions();
  LipschitzProfile prof;
  prof.L.resize(static_cast<std::size_t>(N));
  prof.K.resize(static_cast<std::size_t>(N));
  prof.beta.resize(static_cast<std::size_t>(N));
  prof.rho.resize(static_cast<std::size_t>(N));
  prof.M.resize(static_cast<std::size_t>(N));
  Rng rng(sample_seed);
  for (int i = 0; i < N; ++i) {
    const PopulationSpec& p = m.pop(i);
    prof.beta[static_cast<std::size_t>(i)] = p.beta;
    prof.rho[static_cast<std::size_t>(i)] = p.rho;
    if (p.cost.kind == CostModel::Kind::AffineInMeasure) {
      prof.L[static_cast<std::size_t>(i)] = detail::affine_cost_sensitivity(m, i).constant();
      double M = 0.0;
      for (int x = 0; x < nx; ++x)
        for (int a = 0; a < na; ++a) {
          double hi = p.cost.affine.c0[static_cast<std::size_t>(x * na + a)];
          for (int j = 0; j < N; ++j) {
            const double* row = m.cost_w_row(i, j, x, a);
            hi += *std::max_element(row, row + nx);
          }
          M = std::max(M, hi);
        }
      prof.M[static_cast<std::size_t>(i)] = M;
    } else {
      prof.L[static_cast<std::size_t>(i)] = p.cost.custom.declared_L;
      prof.M[static_cast<std::size_t>(i)] = p.cost.custom.declared_bound;
      double emp = detail::empirical_template_constant(
          m, rng, [&](int x1, int a1, const MeasureSlice& t1, int x2, int a2, const MeasureSlice& t2) {
            return std::abs(m.cost(i, x1, a1, t1) - m.cost(i, x2, a2, t2));
          });
      if (emp > p.cost.custom.declared_L + 1e-9) prof.empirical_exceeds_declared = true;
    }
    if (p.kernel.kind == KernelModel::Kind::MixtureInMeasure) {
      prof.K[static_cast<std::size_t>(i)] = detail::mixture_kernel_sensitivity(m, i).constant();
    } else {
      prof.K[static_cast<std::size_t>(i)] = p.kernel.custom.declared_K;
      double emp = detail::empirical_template_constant(
          m, rng, [&](int x1, int a1, const MeasureSlice& t1, int x2, int a2, const MeasureSlice& t2) {
            return l1_dist(m.kernel(i, x1, a1, t1), m.kernel(i, x2, a2, t2));
          });
      if (emp > p.kernel.custom.declared_K + 1e-9) prof.empirical_exceeds_declared = true;
    }
  }
  prof.derive();
  return prof;
}

}  // namespace mfgc
