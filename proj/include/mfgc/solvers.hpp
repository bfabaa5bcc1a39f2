#pragma once

#include <vector>

#include "mfgc/common.hpp"
#include "mfgc/model.hpp"
#include "mfgc/operators.hpp"
#include "mfgc/parallel.hpp"

namespace mfgc {

struct SolveTrace {
  std::vector<double> residuals;  // summed l1 change per outer iteration
  long iterations = 0;
  bool converged = false;

  // geometric mean of r_{n+1}/r_n over the final (up to) 20 steps
  double tail_rate() const {
    const std::size_t n = residuals.size();
    if (n < 2) return 0.0;
    std::size_t window = std::min<std::size_t>(20, n - 1);
    double start = residuals[n - 1 - window];
    double end = residuals[n - 1];
    if (start <= 0.0 || end <= 0.0) return 0.0;
    return std::pow(end / start, 1.0 / static_cast<double>(window));
  }
};

struct StationarySolution {
  PolicyFlow policy;      // length 1
  MeasureSlice measure;   // fixed point slice
  std::vector<QTable> q;  // final per-population Q tables
  SolveTrace trace;
};

struct FiniteHorizonSolution {
  PolicyFlow policy;          // length T
  StateMeasureFlow flow;      // length T, slice 0 pinned to tau0
  SolveTrace trace;
};

struct SolveOptions {
  double tol = 1e-9;
  long max_iter = 10000;
};

// Algorithm: repeat tau <- (H2(Q^{tau,i}, tau))_i with Q^{tau,i} the Bellman
// fixed point at tolerance tol/10.
inline StationarySolution solve_stationary(const MfgModel& m, const MeasureSlice& tau0, const SolveOptions& opt = {}) {
  const int N = m.n_pops();
  StationarySolution out;
  MeasureSlice tau = tau0;
  std::vector<QTable> qtabs(static_cast<std::size_t>(N));
  for (long it = 0; it < opt.max_iter; ++it) {
    MeasureSlice next(static_cast<std::size_t>(N));
    parallel_for(N, [&](int i) {
      qtabs[static_cast<std::size_t>(i)] = solve_bellman_fixed_point(m, i, tau, opt.tol / 10.0);
      next[static_cast<std::size_t>(i)] = apply_H2(m, i, qtabs[static_cast<std::size_t>(i)], tau);
    });
    double r = slice_l1_dist(next, tau);
    out.trace.residuals.push_back(r);
    tau = std::move(next);
    out.trace.iterations = it + 1;
    if (r <= opt.tol) {
      out.trace.converged = true;
      break;
    }
  }
  out.measure = tau;
  out.q = qtabs;
  out.policy.pi.resize(1);
  out.policy.pi[0].resize(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) {
    auto& rows = out.policy.pi[0][static_cast<std::size_t>(i)];
    rows.resize(static_cast<std::size_t>(m.n_states()));
    for (int x = 0; x < m.n_states(); ++x) rows[static_cast<std::size_t>(x)] = softmin_policy(qtabs[static_cast<std::size_t>(i)].row(x), m.n_actions(), m.pop(i).rho);
  }
  return out;
}

// Finite-horizon iteration: slice 0 stays pinned to tau0; slice t+1 is
// rewritten as H2(Q_t, tau_t), the only indexing consistent with the forward
// consistency equation.
inline FiniteHorizonSolution solve_finite_horizon(const MfgModel& m, const MeasureSlice& tau0, std::size_t T,
                                                  const SolveOptions& opt = {}) {
  if (T < 2) throw DomainError("solve_finite_horizon requires T >= 2");
  const int N = m.n_pops();
  FiniteHorizonSolution out;
  StateMeasureFlow flow;
  flow.data.assign(T, tau0);
  std::vector<std::vector<QTable>> qflows(static_cast<std::size_t>(N));
  for (long it = 0; it < opt.max_iter; ++it) {
    parallel_for(N, [&](int i) { qflows[static_cast<std::size_t>(i)] = backward_q_flow(m, i, flow); });
    StateMeasureFlow next;
    next.data.resize(T);
    next.data[0] = tau0;
    for (std::size_t t = 0; t + 1 < T; ++t) {
      MeasureSlice slice(static_cast<std::size_t>(N));
      for (int i = 0; i < N; ++i) slice[static_cast<std::size_t>(i)] = apply_H2(m, i, qflows[static_cast<std::size_t>(i)][t], flow.data[t]);
      next.data[t + 1] = std::move(slice);
    }
    double r = 0.0;
    for (std::size_t t = 0; t < T; ++t) r += slice_l1_dist(next.data[t], flow.data[t]);
    out.trace.residuals.push_back(r);
    flow = std::move(next);
    out.trace.iterations = it + 1;
    if (r <= opt.tol) {
      out.trace.converged = true;
      break;
    }
  }
  parallel_for(N, [&](int i) { qflows[static_cast<std::size_t>(i)] = backward_q_flow(m, i, flow); });
  out.policy.pi.resize(T);
  for (std::size_t t = 0; t < T; ++t) {
    out.policy.pi[t].resize(static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i) {
      auto& rows = out.policy.pi[t][static_cast<std::size_t>(i)];
      rows.resize(static_cast<std::size_t>(m.n_states()));
      for (int x = 0; x < m.n_states(); ++x)
        rows[static_cast<std::size_t>(x)] = softmin_policy(qflows[static_cast<std::size_t>(i)][t].row(x), m.n_actions(), m.pop(i).rho);
    }
  }
  out.flow = std::move(flow);
  return out;
}

}  // namespace mfgc
