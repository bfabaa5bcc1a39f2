#pragma once

#include <cmath>
#include <vector>

#include "mfgc/common.hpp"
#include "mfgc/model.hpp"

namespace mfgc {

// State-action value table of one population, row-major over (x,a).
struct QTable {
  int pop = 0;
  int nx = 0;
  int na = 0;
  std::vector<double> q;

  QTable() = default;
  QTable(int pop_, int nx_, int na_, double fill = 0.0)
      : pop(pop_), nx(nx_), na(na_), q(static_cast<std::size_t>(nx_ * na_), fill) {}

  double& at(int x, int a) { return q[static_cast<std::size_t>(x * na + a)]; }
  double at(int x, int a) const { return q[static_cast<std::size_t>(x * na + a)]; }
  const double* row(int x) const { return &q[static_cast<std::size_t>(x * na)]; }

  double sup_norm() const {
    double s = 0.0;
    for (double v : q) s = std::max(s, std::abs(v));
    return s;
  }

  double sup_dist(const QTable& other) const { return linf_dist(q, other.q); }
};

// pi[t][i][x] -> distribution over actions
struct PolicyFlow {
  std::vector<std::vector<std::vector<Dist>>> pi;
};

// Unique minimizer of u -> <qrow,u> + rho*Omega(u) for entropic Omega:
// u*(a) proportional to exp(-qrow(a)/rho), max-subtracted for stability.
inline Dist softmin_policy(const double* qrow, int na, double rho) {
  Dist u(static_cast<std::size_t>(na));
  double mx = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < na; ++a) mx = std::max(mx, -qrow[a] / rho);
  double z = 0.0;
  for (int a = 0; a < na; ++a) {
    u[static_cast<std::size_t>(a)] = std::exp(-qrow[a] / rho - mx);
    z += u[static_cast<std::size_t>(a)];
  }
  for (auto& v : u) v /= z;
  return u;
}

inline Dist softmin_policy(const Dist& qrow, double rho) {
  return softmin_policy(qrow.data(), static_cast<int>(qrow.size()), rho);
}

// Softmin value -rho log sum_a exp(-q(a)/rho): the minimum of the lifted row
// over P(A) under the entropic regularizer.
inline double softmin_value(const double* qrow, int na, double rho) {
  double mx = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < na; ++a) mx = std::max(mx, -qrow[a] / rho);
  double z = 0.0;
  for (int a = 0; a < na; ++a) z += std::exp(-qrow[a] / rho - mx);
  return -rho * (mx + std::log(z));
}

// Q_min(y) per state.
inline Dist softmin_values(const QTable& Q, double rho) {
  Dist out(static_cast<std::size_t>(Q.nx));
  for (int x = 0; x < Q.nx; ++x) out[static_cast<std::size_t>(x)] = softmin_value(Q.row(x), Q.na, rho);
  return out;
}

// Q'(x,a) = c_i(x,a,tau) + beta_i sum_y Q_min(y) p_i(y|x,a,tau)
inline QTable apply_H1(const MfgModel& m, int i, const QTable& Q, const MeasureSlice& tau) {
  const int nx = m.n_states(), na = m.n_actions();
  const double rho = m.pop(i).rho, beta = m.pop(i).beta;
  QTable out(i, nx, na);
  Dist qmin = softmin_values(Q, rho);
  Dist mixpart = m.kernel_mix_part(i, tau);
  Dist row(static_cast<std::size_t>(nx));
  for (int x = 0; x < nx; ++x)
    for (int a = 0; a < na; ++a) {
      m.kernel_into(i, x, a, tau, mixpart, row);
      double s = 0.0;
      for (int y = 0; y < nx; ++y) s += qmin[static_cast<std::size_t>(y)] * row[static_cast<std::size_t>(y)];
      out.at(x, a) = m.cost(i, x, a, tau) + beta * s;
    }
  return out;
}

// sum_x sum_a p_i(.|x,a,tau) u*_x(a) tau_i(x) with u*_x the softmin policy of
// row x. The result is renormalized to unit mass when it is already within
// rounding distance of it: measure-dependent kernels multiply their input's
// mass, so composed updates would otherwise amplify 1-ulp drift per step.
inline Dist apply_H2(const MfgModel& m, int i, const QTable& Q, const MeasureSlice& tau) {
  const int nx = m.n_states(), na = m.n_actions();
  const double rho = m.pop(i).rho;
  Dist out(static_cast<std::size_t>(nx), 0.0);
  Dist mixpart = m.kernel_mix_part(i, tau);
  Dist row(static_cast<std::size_t>(nx));
  for (int x = 0; x < nx; ++x) {
    double tx = tau[static_cast<std::size_t>(i)][static_cast<std::size_t>(x)];
    if (tx == 0.0) continue;
    Dist u = softmin_policy(Q.row(x), na, rho);
    for (int a = 0; a < na; ++a) {
      double wxa = tx * u[static_cast<std::size_t>(a)];
      if (wxa == 0.0) continue;
      m.kernel_into(i, x, a, tau, mixpart, row);
      for (int y = 0; y < nx; ++y) out[static_cast<std::size_t>(y)] += wxa * row[static_cast<std::size_t>(y)];
    }
  }
  double mass = sum(out);
  if (mass > 0.0 && std::abs(mass - 1.0) <= 1e-8)
    for (auto& v : out) v /= mass;
  return out;
}

// Iterates H1 from Q=0 until ||H1(Q)-Q||_inf <= eps(1-beta), which leaves the
// iterate within eps of the fixed point by the standard contraction bound.
inline QTable solve_bellman_fixed_point(const MfgModel& m, int i, const MeasureSlice& tau, double eps,
                                        double cost_bound_hint = -1.0) {
  const double beta = m.pop(i).beta;
  QTable Q(i, m.n_states(), m.n_actions());
  if (beta == 0.0) return apply_H1(m, i, Q, tau);
  double M = cost_bound_hint;
  if (M < 0.0) {
    M = 1.0;
    if (m.pop(i).cost.kind == CostModel::Kind::AffineInMeasure) {
      const AffineCost& c = m.pop(i).cost.affine;
      double hi = 0.0;
      for (int x = 0; x < m.n_states(); ++x)
        for (int a = 0; a < m.n_actions(); ++a) {
          double v = c.c0[static_cast<std::size_t>(x * m.n_actions() + a)];
          for (int j = 0; j < m.n_pops(); ++j) {
            const double* row = m.cost_w_row(i, j, x, a);
            v += *std::max_element(row, row + m.n_states());
          }
          hi = std::max(hi, v);
        }
      M = std::max(hi, 1.0);
    }
  }
  double target = eps * (1.0 - beta);
  double span = 2.0 * M / (1.0 - beta) + m.pop(i).rho * std::log(static_cast<double>(m.n_actions())) + 1.0;
  long max_iter = static_cast<long>(std::ceil(std::log(target / span) / std::log(beta))) + 64;
  for (long it = 0; it < max_iter; ++it) {
    QTable next = apply_H1(m, i, Q, tau);
    if (next.sup_dist(Q) <= target) return next;
    Q = std::move(next);
  }
  throw IterationLimit("bellman fixed point: residual target not met for population " + std::to_string(i));
}

// Q_{T-1}(x,a) = c_i(x,a,tau_{T-1}); Q_t = H1 with tau_t and Q_{t+1}.
inline std::vector<QTable> backward_q_flow(const MfgModel& m, int i, const StateMeasureFlow& tau_flow) {
  const std::size_t T = tau_flow.horizon();
  const int nx = m.n_states(), na = m.n_actions();
  std::vector<QTable> flow(T, QTable(i, nx, na));
  const MeasureSlice& last = tau_flow.data[T - 1];
  for (int x = 0; x < nx; ++x)
    for (int a = 0; a < na; ++a) flow[T - 1].at(x, a) = m.cost(i, x, a, last);
  for (std::size_t t = T - 1; t-- > 0;) flow[t] = apply_H1(m, i, flow[t + 1], tau_flow.data[t]);
  return flow;
}

}  // namespace mfgc
