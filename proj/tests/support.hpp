#pragma once

// Shared test fixtures: deterministic model/profile generators and the
// brute-force oracles the library results are checked against. Everything
// here stays independent of the code paths under test: spectral radii come
// from Gelfand squaring, softmin values from direct minimization over the
// simplex, operator results from literal summation of the definitions.

#include <cmath>
#include <functional>
#include <vector>

#include "mfgc/mfgc.hpp"

namespace testsup {

using mfgc::Dist;
using mfgc::MeasureSlice;
using mfgc::MfgModel;
using mfgc::QTable;
using mfgc::Rng;

// ---------------------------------------------------------------------------
// generators
// ---------------------------------------------------------------------------

struct ModelKnobs {
  double delta_p = 0.05;   // kernel state/action tilt
  double eps = 0.25;       // measure mixing weight
  double w_scale = 0.3;    // cost measure-coupling scale
  double beta_lo = 0.5, beta_hi = 0.9;
  double rho_lo = 1.0, rho_hi = 2.5;
  double cost_scale = 1.0;
};

inline Dist dirichlet_like(Rng& rng, std::size_t n, double sharp) {
  Dist v(n);
  double s = 0.0;
  for (auto& x : v) {
    x = std::pow(rng.uniform(1e-6, 1.0), 1.0 / sharp);
    s += x;
  }
  for (auto& x : v) x /= s;
  return v;
}

// Affine-in-measure model family whose members are usually certified when
// the knobs keep the kernel tilt and coupling small.
inline MfgModel random_affine_model(std::uint64_t seed, int N, int nx, int na, const ModelKnobs& kn = {}) {
  Rng rng(seed);
  std::vector<mfgc::PopulationSpec> pops;
  for (int i = 0; i < N; ++i) {
    mfgc::PopulationSpec spec;
    spec.beta = rng.uniform(kn.beta_lo, kn.beta_hi);
    spec.rho = rng.uniform(kn.rho_lo, kn.rho_hi);
    spec.cost.kind = mfgc::CostModel::Kind::AffineInMeasure;
    auto& c = spec.cost.affine;
    c.c0.resize(static_cast<std::size_t>(nx * na));
    for (auto& v : c.c0) v = rng.uniform(0.0, kn.cost_scale);
    c.w.resize(static_cast<std::size_t>(N * nx * na * nx));
    for (auto& v : c.w) v = rng.uniform(0.0, kn.w_scale);
    spec.kernel.kind = mfgc::KernelModel::Kind::MixtureInMeasure;
    auto& k = spec.kernel.mixture;
    k.epsilon = kn.eps;
    Dist nu = dirichlet_like(rng, static_cast<std::size_t>(nx), 2.0);
    k.p0.resize(static_cast<std::size_t>(nx * na * nx));
    for (int x = 0; x < nx; ++x)
      for (int a = 0; a < na; ++a) {
        double s = 0.0;
        std::vector<double> row(static_cast<std::size_t>(nx));
        for (int y = 0; y < nx; ++y) {
          row[static_cast<std::size_t>(y)] = nu[static_cast<std::size_t>(y)] + kn.delta_p * rng.uniform();
          s += row[static_cast<std::size_t>(y)];
        }
        for (int y = 0; y < nx; ++y) k.p0[static_cast<std::size_t>((x * na + a) * nx + y)] = row[static_cast<std::size_t>(y)] / s;
      }
    k.mix.resize(static_cast<std::size_t>(N * nx * nx));
    for (int j = 0; j < N; ++j)
      for (int y = 0; y < nx; ++y) {
        Dist row = dirichlet_like(rng, static_cast<std::size_t>(nx), 1.5);
        for (int y2 = 0; y2 < nx; ++y2) k.mix[static_cast<std::size_t>((j * nx + y) * nx + y2)] = row[static_cast<std::size_t>(y2)];
      }
    k.lambda = dirichlet_like(rng, static_cast<std::size_t>(N), 1.0);
    pops.push_back(std::move(spec));
  }
  return MfgModel(nx, na, std::move(pops));
}

// Profile with beta_i K_i / 2 < 1 by construction; `scale` shrinks K toward
// the certified range.
inline mfgc::LipschitzProfile random_profile(std::uint64_t seed, int N, double scale = 0.25) {
  Rng rng(seed);
  std::vector<double> L(static_cast<std::size_t>(N)), K(static_cast<std::size_t>(N)), beta(static_cast<std::size_t>(N)),
      rho(static_cast<std::size_t>(N));
  for (int i = 0; i < N; ++i) {
    const std::size_t k = static_cast<std::size_t>(i);
    beta[k] = rng.uniform(0.3, 0.95);
    rho[k] = rng.uniform(0.5, 2.0);
    L[k] = rng.uniform(0.05, 0.6) * scale * 4.0;
    K[k] = rng.uniform(0.05, 0.6) * scale;
  }
  return mfgc::LipschitzProfile::from_constants(L, K, beta, rho);
}

inline mfgc::LipschitzProfile certified_stable_profile(std::uint64_t seed, int N) {
  for (std::uint64_t s = seed;; ++s) {
    mfgc::LipschitzProfile p = random_profile(s, N, 0.3);
    mfgc::VariationalResult v = mfgc::minimize_V(p, mfgc::Variant::A);
    if (v.certified && v.t_o > 1.0) return p;
  }
}

inline MeasureSlice random_slice(Rng& rng, int N, int nx) {
  MeasureSlice tau;
  for (int j = 0; j < N; ++j) tau.push_back(rng.simplex_point(static_cast<std::size_t>(nx)));
  return tau;
}

inline MeasureSlice uniform_slice(int N, int nx) {
  return MeasureSlice(static_cast<std::size_t>(N), mfgc::uniform_dist(static_cast<std::size_t>(nx)));
}

// ---------------------------------------------------------------------------
// oracles
// ---------------------------------------------------------------------------

// Minimize <q,u> + rho * sum u log u over the simplex by nested 1-D grid
// refinement; independent of the closed-form softmin.
inline double softmin_value_oracle(const Dist& q, double rho) {
  const std::size_t na = q.size();
  auto objective = [&](const Dist& u) {
    double v = 0.0;
    for (std::size_t a = 0; a < na; ++a) {
      v += q[a] * u[a];
      if (u[a] > 0.0) v += rho * u[a] * std::log(u[a]);
    }
    return v;
  };
  // recursive grid over the simplex; enough resolution for <= 3 actions
  double best = std::numeric_limits<double>::infinity();
  const int steps = na <= 2 ? 4000 : 160;
  std::vector<double> u(na, 0.0);
  std::function<void(std::size_t, double)> rec = [&](std::size_t idx, double remaining) {
    if (idx + 1 == na) {
      u[idx] = remaining;
      best = std::min(best, objective(u));
      return;
    }
    for (int s = 0; s <= steps; ++s) {
      u[idx] = remaining * static_cast<double>(s) / steps;
      rec(idx + 1, remaining - u[idx]);
    }
  };
  rec(0, 1.0);
  return best;
}

// Literal display formula for H1 with the oracle softmin value.
inline QTable h1_oracle(const MfgModel& m, int i, const QTable& Q, const MeasureSlice& tau) {
  const int nx = m.n_states(), na = m.n_actions();
  QTable out(i, nx, na);
  Dist qmin(static_cast<std::size_t>(nx));
  for (int y = 0; y < nx; ++y) {
    Dist row(static_cast<std::size_t>(na));
    for (int a = 0; a < na; ++a) row[static_cast<std::size_t>(a)] = Q.at(y, a);
    qmin[static_cast<std::size_t>(y)] = softmin_value_oracle(row, m.pop(i).rho);
  }
  for (int x = 0; x < nx; ++x)
    for (int a = 0; a < na; ++a) {
      Dist p = m.kernel(i, x, a, tau);
      double s = 0.0;
      for (int y = 0; y < nx; ++y) s += qmin[static_cast<std::size_t>(y)] * p[static_cast<std::size_t>(y)];
      out.at(x, a) = m.cost(i, x, a, tau) + m.pop(i).beta * s;
    }
  return out;
}

// Triple-sum definition of the measure update.
inline Dist h2_oracle(const MfgModel& m, int i, const QTable& Q, const MeasureSlice& tau) {
  const int nx = m.n_states(), na = m.n_actions();
  Dist out(static_cast<std::size_t>(nx), 0.0);
  for (int x = 0; x < nx; ++x) {
    Dist u = mfgc::softmin_policy(Q.row(x), na, m.pop(i).rho);
    for (int a = 0; a < na; ++a) {
      Dist p = m.kernel(i, x, a, tau);
      for (int y = 0; y < nx; ++y)
        out[static_cast<std::size_t>(y)] +=
            p[static_cast<std::size_t>(y)] * u[static_cast<std::size_t>(a)] * tau[static_cast<std::size_t>(i)][static_cast<std::size_t>(x)];
    }
  }
  return out;
}

// Exact template constants by enumeration of product-simplex vertex pairs.
struct VertexLipschitz {
  double L = 0.0;
  double K = 0.0;
};

inline VertexLipschitz vertex_lipschitz_oracle(const MfgModel& m, int i) {
  const int N = m.n_pops(), nx = m.n_states(), na = m.n_actions();
  std::vector<MeasureSlice> vertices;
  std::vector<int> ys(static_cast<std::size_t>(N), 0);
  while (true) {
    MeasureSlice tau(static_cast<std::size_t>(N), Dist(static_cast<std::size_t>(nx), 0.0));
    for (int j = 0; j < N; ++j) tau[static_cast<std::size_t>(j)][static_cast<std::size_t>(ys[static_cast<std::size_t>(j)])] = 1.0;
    vertices.push_back(std::move(tau));
    int j = 0;
    while (j < N && ++ys[static_cast<std::size_t>(j)] == nx) ys[static_cast<std::size_t>(j++)] = 0;
    if (j == N) break;
  }
  VertexLipschitz out;
  for (std::size_t v1 = 0; v1 < vertices.size(); ++v1)
    for (std::size_t v2 = 0; v2 < vertices.size(); ++v2)
      for (int x1 = 0; x1 < nx; ++x1)
        for (int a1 = 0; a1 < na; ++a1)
          for (int x2 = 0; x2 < nx; ++x2)
            for (int a2 = 0; a2 < na; ++a2) {
              double denom = (x1 != x2 ? 1.0 : 0.0) + (a1 != a2 ? 2.0 : 0.0);
              for (int j = 0; j < N; ++j)
                denom += mfgc::l1_dist(vertices[v1][static_cast<std::size_t>(j)], vertices[v2][static_cast<std::size_t>(j)]);
              if (denom < 1e-14) continue;
              double dc = std::abs(m.cost(i, x1, a1, vertices[v1]) - m.cost(i, x2, a2, vertices[v2]));
              double dp = mfgc::l1_dist(m.kernel(i, x1, a1, vertices[v1]), m.kernel(i, x2, a2, vertices[v2]));
              out.L = std::max(out.L, dc / denom);
              out.K = std::max(out.K, dp / denom);
            }
  return out;
}

// Random Q tables shaped like H1 iterates: a few H1 applications from zero.
inline QTable random_candidate_q(const MfgModel& m, int i, Rng& rng, int burn = 3) {
  QTable q(i, m.n_states(), m.n_actions());
  MeasureSlice tau = random_slice(rng, m.n_pops(), m.n_states());
  for (int b = 0; b < burn; ++b) {
    q = mfgc::apply_H1(m, i, q, tau);
    tau = random_slice(rng, m.n_pops(), m.n_states());
  }
  return q;
}

}  // namespace testsup
