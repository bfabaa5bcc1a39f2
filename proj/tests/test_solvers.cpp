#include <catch2/catch_amalgamated.hpp>

#include "mfgc/contraction.hpp"
#include "mfgc/solvers.hpp"
#include "support.hpp"

using namespace mfgc;
using namespace testsup;

namespace {

MfgModel measure_independent_model(std::uint64_t seed) {
  MfgModel m = random_affine_model(seed, 2, 3, 2);
  for (int i = 0; i < 2; ++i) {
    for (auto& v : m.pop(i).cost.affine.w) v = 0.0;
    m.pop(i).kernel.mixture.epsilon = 0.0;
  }
  return m;
}

}  // namespace

TEST_CASE("measure-independent model settles after one update") {
  MfgModel m = measure_independent_model(3);
  // H2 still depends on tau_i through the occupied states; remove that too by
  // making the kernel state-action independent
  auto freeze = [&](int i) {
    auto& k = m.pop(i).kernel.mixture;
    for (int x = 0; x < 3; ++x)
      for (int a = 0; a < 2; ++a)
        for (int y = 0; y < 3; ++y) k.p0[static_cast<std::size_t>((x * 2 + a) * 3 + y)] = (y == 0) ? 0.6 : 0.2;
  };
  freeze(0);
  freeze(1);
  SolveOptions opt;
  StationarySolution sol = solve_stationary(m, uniform_slice(2, 3), opt);
  CHECK(sol.trace.converged);
  CHECK(sol.trace.iterations <= 2);
}

TEST_CASE("exchangeable populations give identical fixed points") {
  MfgModel m = random_affine_model(5, 1, 3, 2);
  // duplicate population 0 into a 2-population model with symmetric coupling
  std::vector<PopulationSpec> pops(2);
  for (int i = 0; i < 2; ++i) {
    PopulationSpec spec = m.pop(0);
    auto& c = spec.cost.affine;
    std::vector<double> w2(static_cast<std::size_t>(2 * 3 * 2 * 3));
    for (int j = 0; j < 2; ++j)
      for (std::size_t k = 0; k < static_cast<std::size_t>(3 * 2 * 3); ++k) w2[static_cast<std::size_t>(j) * (3 * 2 * 3) + k] = c.w[k];
    c.w = w2;
    auto& kk = spec.kernel.mixture;
    std::vector<double> mix2(static_cast<std::size_t>(2 * 3 * 3));
    for (int j = 0; j < 2; ++j)
      for (std::size_t k = 0; k < 9; ++k) mix2[static_cast<std::size_t>(j) * 9 + k] = kk.mix[k];
    kk.mix = mix2;
    kk.lambda = {0.5, 0.5};
    pops[static_cast<std::size_t>(i)] = std::move(spec);
  }
  MfgModel sym(3, 2, pops);
  SolveOptions opt;
  opt.tol = 1e-10;
  StationarySolution sol = solve_stationary(sym, uniform_slice(2, 3), opt);
  REQUIRE(sol.trace.converged);
  CHECK(l1_dist(sol.measure[0], sol.measure[1]) <= opt.tol);
}

TEST_CASE("certified stationary solve: consistency and tail rate") {
  MfgModel m = random_affine_model(9, 2, 3, 2);
  LipschitzProfile prof = estimate_lipschitz(m);
  StationaryCertificate cert = stationary_certificate(prof);
  REQUIRE(cert.certified);
  SolveOptions opt;
  opt.tol = 1e-11;
  StationarySolution sol = solve_stationary(m, uniform_slice(2, 3), opt);
  REQUIRE(sol.trace.converged);

  // MFE consistency: one more full update moves the slice by <= 2 tol
  MeasureSlice again(2);
  for (int i = 0; i < 2; ++i)
    again[static_cast<std::size_t>(i)] = apply_H2(m, i, solve_bellman_fixed_point(m, i, sol.measure, opt.tol / 10.0), sol.measure);
  CHECK(slice_l1_dist(again, sol.measure) <= 2.0 * opt.tol);

  double rho_m = rho_B(prof, 1.0, Variant::A);  // equals rho of the stationary matrix
  if (sol.trace.iterations >= 25) CHECK(sol.trace.tail_rate() <= rho_m + 0.05);
}

TEST_CASE("stationary trace is deterministic") {
  MfgModel m = random_affine_model(11, 2, 3, 2);
  SolveOptions opt;
  StationarySolution s1 = solve_stationary(m, uniform_slice(2, 3), opt);
  StationarySolution s2 = solve_stationary(m, uniform_slice(2, 3), opt);
  REQUIRE(s1.trace.residuals.size() == s2.trace.residuals.size());
  for (std::size_t k = 0; k < s1.trace.residuals.size(); ++k) REQUIRE(s1.trace.residuals[k] == s2.trace.residuals[k]);
}

TEST_CASE("finite-horizon trace and flow are deterministic") {
  MfgModel m = random_affine_model(11, 2, 3, 2);
  SolveOptions opt;
  FiniteHorizonSolution s1 = solve_finite_horizon(m, uniform_slice(2, 3), 7, opt);
  FiniteHorizonSolution s2 = solve_finite_horizon(m, uniform_slice(2, 3), 7, opt);
  REQUIRE(s1.trace.residuals == s2.trace.residuals);
  for (std::size_t t = 0; t < 7; ++t)
    for (int i = 0; i < 2; ++i)
      REQUIRE(s1.flow.data[t][static_cast<std::size_t>(i)] == s2.flow.data[t][static_cast<std::size_t>(i)]);
}

TEST_CASE("finite horizon with T = 2 has a single free slice") {
  MfgModel m = random_affine_model(13, 2, 3, 2);
  SolveOptions opt;
  FiniteHorizonSolution sol = solve_finite_horizon(m, uniform_slice(2, 3), 2, opt);
  REQUIRE(sol.trace.converged);
  REQUIRE(sol.flow.horizon() == 2);
  // fixed point: slice 1 = H2(Q_0, slice 0) with the cost-terminal Q-flow
  std::vector<QTable> q0 = backward_q_flow(m, 0, sol.flow);
  std::vector<QTable> q1 = backward_q_flow(m, 1, sol.flow);
  MeasureSlice expect(2);
  expect[0] = apply_H2(m, 0, q0[0], sol.flow.data[0]);
  expect[1] = apply_H2(m, 1, q1[0], sol.flow.data[0]);
  CHECK(slice_l1_dist(expect, sol.flow.data[1]) <= 2.0 * opt.tol);
}

TEST_CASE("slice zero stays bit-identical to tau0") {
  MfgModel m = random_affine_model(17, 2, 3, 2);
  Rng rng(4);
  MeasureSlice tau0 = random_slice(rng, 2, 3);
  FiniteHorizonSolution sol = solve_finite_horizon(m, tau0, 6, {});
  for (int i = 0; i < 2; ++i)
    for (int x = 0; x < 3; ++x)
      REQUIRE(sol.flow.data[0][static_cast<std::size_t>(i)][static_cast<std::size_t>(x)] ==
              tau0[static_cast<std::size_t>(i)][static_cast<std::size_t>(x)]);
}

TEST_CASE("beta = 0 reduces to the forward measure map") {
  MfgModel m = random_affine_model(19, 2, 3, 2);
  m.pop(0).beta = 0.0;
  m.pop(1).beta = 0.0;
  Rng rng(5);
  MeasureSlice tau0 = random_slice(rng, 2, 3);
  const std::size_t T = 6;
  SolveOptions opt;
  opt.tol = 1e-12;
  FiniteHorizonSolution sol = solve_finite_horizon(m, tau0, T, opt);
  REQUIRE(sol.trace.converged);
  // oracle: iterate the one-step map slice by slice; with beta = 0 the
  // Q-table at slice t is the myopic cost at tau_t
  MeasureSlice cur = tau0;
  for (std::size_t t = 0; t + 1 < T; ++t) {
    MeasureSlice next(2);
    for (int i = 0; i < 2; ++i) {
      QTable q(i, 3, 2);
      for (int x = 0; x < 3; ++x)
        for (int a = 0; a < 2; ++a) q.at(x, a) = m.cost(i, x, a, cur);
      next[static_cast<std::size_t>(i)] = apply_H2(m, i, q, cur);
    }
    cur = std::move(next);
    REQUIRE(slice_l1_dist(cur, sol.flow.data[t + 1]) <= 1e-9);
  }
}

TEST_CASE("certified finite-horizon solve is self-consistent at every slice") {
  MfgModel m = random_affine_model(23, 2, 3, 2);
  LipschitzProfile prof = estimate_lipschitz(m);
  VariationalResult var = minimize_V(prof, Variant::A);
  REQUIRE(var.certified);
  SolveOptions opt;
  opt.tol = 1e-10;
  const std::size_t T = 8;
  FiniteHorizonSolution sol = solve_finite_horizon(m, uniform_slice(2, 3), T, opt);
  REQUIRE(sol.trace.converged);
  std::vector<std::vector<QTable>> qf(2);
  for (int i = 0; i < 2; ++i) qf[static_cast<std::size_t>(i)] = backward_q_flow(m, i, sol.flow);
  for (std::size_t t = 0; t + 1 < T; ++t) {
    MeasureSlice next(2);
    for (int i = 0; i < 2; ++i) next[static_cast<std::size_t>(i)] = apply_H2(m, i, qf[static_cast<std::size_t>(i)][t], sol.flow.data[t]);
    REQUIRE(slice_l1_dist(next, sol.flow.data[t + 1]) <= 2.0 * opt.tol);
  }
}

TEST_CASE("finite-horizon tail rate stays under the certified radius") {
  MfgModel m = random_affine_model(29, 2, 3, 2);
  LipschitzProfile prof = estimate_lipschitz(m);
  const std::size_t T = 10;
  double rho = rho_ST(prof, T);
  REQUIRE(rho < 1.0);
  SolveOptions opt;
  opt.tol = 1e-13;
  opt.max_iter = 4000;
  FiniteHorizonSolution sol = solve_finite_horizon(m, uniform_slice(2, 3), T, opt);
  if (sol.trace.converged && sol.trace.iterations >= 60) {
    CHECK(sol.trace.tail_rate() <= rho + 0.05);
  } else {
    SUCCEED();  // converged too fast to measure a 20-step tail
  }
}

TEST_CASE("iteration limit reports best iterate") {
  MfgModel m = random_affine_model(31, 2, 3, 2);
  SolveOptions opt;
  opt.tol = 1e-12;
  opt.max_iter = 2;
  StationarySolution sol = solve_stationary(m, uniform_slice(2, 3), opt);
  CHECK_FALSE(sol.trace.converged);
  CHECK(sol.trace.iterations == 2);
  CHECK(sol.measure.size() == 2);
}
