#pragma once

#include <string>
#include <vector>

#include "mfgc/common.hpp"
#include "mfgc/contraction.hpp"
#include "mfgc/matrix.hpp"
#include "mfgc/spectral.hpp"

namespace mfgc {

struct BlockPartition {
  std::vector<std::size_t> sizes;

  std::size_t total() const {
    std::size_t s = 0;
    for (auto n : sizes) s += n;
    return s;
  }

  void validate(std::size_t dim) const {
    if (sizes.empty()) throw DomainError("partition must have at least one block");
    for (auto n : sizes)
      if (n < 1) throw DomainError("partition block sizes must be >= 1");
    if (total() != dim) throw DomainError("partition sizes must sum to the matrix dimension");
  }
};

struct ReductionChain {
  std::vector<Matrix> leading;      // B_k for k = 1..m-1 (as far as the chain went)
  std::vector<double> leading_rho;  // rho(B_k)
  Matrix final_block;               // R_m when feasible
  double final_rho = 0.0;           // rho(R_m)
  bool feasible = true;             // false if some rho(B_k) >= 1 stopped the chain
};

namespace detail {

// Chain blocks of arbitrary nonnegative matrices can be reducible, where
// Collatz-Wielandt brackets never close; the Gelfand estimate handles those.
inline double rho_of(const Matrix& a) {
  if (a.rows() == 1) return a(0, 0);
  return gelfand_spectral_radius(a);
}

// (I-B)^{-1} C: truncated Neumann series when B is comfortably subcritical,
// direct solve otherwise
inline Matrix solve_neumann(const Matrix& b, const Matrix& c, double rho_b) {
  if (rho_b < 1.0 - 1e-6) {
    Matrix acc = c;
    Matrix term = c;
    for (int l = 0; l < 100000; ++l) {
      term = b.multiply(term);
      for (std::size_t r = 0; r < acc.rows(); ++r)
        for (std::size_t cc = 0; cc < acc.cols(); ++cc) acc(r, cc) += term(r, cc);
      if (term.norm1() <= 1e-14 * std::max(1.0, acc.norm1())) break;
    }
    return acc;
  }
  Matrix ib = Matrix::identity(b.rows());
  for (std::size_t r = 0; r < b.rows(); ++r)
    for (std::size_t cc = 0; cc < b.cols(); ++cc) ib(r, cc) -= b(r, cc);
  return lu_solve(ib, c);
}

}  // namespace detail

// R_1 = A; R_{k+1} = E_k + D_k (I - B_k)^{-1} C_k. Schur updates of
// nonnegative data stay nonnegative while rho(B_k) < 1; a supercritical
// leading block stops the chain and the result reports infeasible.
inline ReductionChain schur_reduce(const Matrix& a, const BlockPartition& partition) {
  if (!a.nonnegative()) throw DomainError("schur_reduce requires a nonnegative matrix");
  partition.validate(a.rows());
  ReductionChain chain;
  Matrix r = a;
  const std::size_t m = partition.sizes.size();
  for (std::size_t k = 0; k + 1 < m; ++k) {
    const std::size_t nb = partition.sizes[k];
    const std::size_t rest = r.rows() - nb;
    Matrix b = r.block(0, 0, nb, nb);
    double rho_b = detail::rho_of(b);
    chain.leading.push_back(b);
    chain.leading_rho.push_back(rho_b);
    if (rho_b >= 1.0) {
      chain.feasible = false;
      return chain;
    }
    Matrix c = r.block(0, nb, nb, rest);
    Matrix d = r.block(nb, 0, rest, nb);
    Matrix e = r.block(nb, nb, rest, rest);
    Matrix solved = detail::solve_neumann(b, c, rho_b);
    Matrix update = d.multiply(solved);
    for (std::size_t rr = 0; rr < rest; ++rr)
      for (std::size_t cc = 0; cc < rest; ++cc) e(rr, cc) += update(rr, cc);
    r = std::move(e);
  }
  chain.final_block = r;
  chain.final_rho = detail::rho_of(r);
  return chain;
}

struct SlowFastCertificate {
  bool certified = false;
  ReductionChain chain;
};

// rho(A) < 1 iff every leading rho(B_k) < 1 and rho(R_m) < 1
inline SlowFastCertificate slowfast_certificate(const Matrix& a, const BlockPartition& partition) {
  SlowFastCertificate out;
  out.chain = schur_reduce(a, partition);
  out.certified = out.chain.feasible && out.chain.final_rho < 1.0;
  return out;
}

enum class SlowFastMode { Stationary, FiniteHorizon };

struct MfgSlowFastReport {
  bool certified = false;
  bool direct_certified = false;  // matching whole-system verdict
  bool agree = false;
  SlowFastMode mode = SlowFastMode::Stationary;
  std::size_t split = 0;
  std::size_t horizon = 0;
  ReductionChain chain;
};

// Builds the contraction matrix of the profile (stationary M or finite S_T),
// partitions it at population split N_1, and checks that the slow-fast Schur
// verdict matches the direct certificate.
inline MfgSlowFastReport mfg_slowfast_check(const LipschitzProfile& p, std::size_t n1, SlowFastMode mode,
                                            std::size_t T = 0) {
  const std::size_t N = static_cast<std::size_t>(p.n_pops());
  if (n1 < 1 || n1 >= N) throw DomainError("mfg_slowfast_check: split must satisfy 1 <= N_1 < N");
  MfgSlowFastReport rep;
  rep.mode = mode;
  rep.split = n1;
  if (mode == SlowFastMode::Stationary) {
    Matrix m = stationary_matrix(p);
    SlowFastCertificate cert = slowfast_certificate(m, BlockPartition{{n1, N - n1}});
    rep.certified = cert.certified;
    rep.chain = std::move(cert.chain);
    rep.direct_certified = stationary_certificate(p).certified;
  } else {
    if (T < 2) throw DomainError("mfg_slowfast_check: finite mode requires T >= 2");
    rep.horizon = T;
    Matrix s = build_ST(p, T);
    const std::size_t n = T - 1;
    SlowFastCertificate cert = slowfast_certificate(s, BlockPartition{{n1 * n, (N - n1) * n}});
    rep.certified = cert.certified;
    rep.chain = std::move(cert.chain);
    rep.direct_certified = rho_ST(p, T) < 1.0;
  }
  rep.agree = rep.certified == rep.direct_certified;
  return rep;
}

}  // namespace mfgc
