#pragma once

#include <functional>
#include <vector>

#include "mfgc/common.hpp"
#include "mfgc/matrix.hpp"

namespace mfgc {

// Nonnegative operator given as a matvec.
using MatVec = std::function<std::vector<double>(const std::vector<double>&)>;

struct PerronResult {
  double rho = 0.0;
  std::vector<double> vector;  // positive right eigenvector, first entry = 1
  double cw_lower = 0.0;
  double cw_upper = 0.0;
  long iterations = 0;
};

struct PerronOptions {
  double tol = 1e-11;     // bracket width target
  long max_iter = 200000;
};

// max_i (Ax)_i / x_i for positive x: an upper bound on rho(A)
inline double collatz_upper(const MatVec& op, const std::vector<double>& x) {
  std::vector<double> ax = op(x);
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < x.size(); ++i) best = std::max(best, ax[i] / x[i]);
  return best;
}

// Power iteration from the all-ones vector with Collatz-Wielandt bracketing.
// Requires an irreducible nonnegative operator with a positive diagonal entry
// somewhere on its cycle structure; use perron_shifted otherwise.
inline PerronResult perron(const MatVec& op, std::size_t n, const PerronOptions& opt = {}) {
  std::vector<double> x(n, 1.0);
  PerronResult res;
  double lo = 0.0, hi = 0.0;
  for (long it = 0; it < opt.max_iter; ++it) {
    std::vector<double> ax = op(x);
    lo = std::numeric_limits<double>::infinity();
    hi = -std::numeric_limits<double>::infinity();
    double mass = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double ratio = ax[i] / x[i];
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
      mass += std::abs(ax[i]);
    }
    res.iterations = it + 1;
    if (hi - lo <= opt.tol) {
      res.rho = 0.5 * (lo + hi);
      res.cw_lower = lo;
      res.cw_upper = hi;
      for (std::size_t i = 0; i < n; ++i) x[i] = ax[i] / mass;
      double first = x[0];
      if (first <= 0.0) throw NonPositiveIterate("perron: eigenvector has a nonpositive first entry");
      for (auto& v : x) v /= first;
      res.vector = std::move(x);
      return res;
    }
    if (mass <= 0.0) throw NonPositiveIterate("perron: iterate collapsed to zero (reducible operator?)");
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = ax[i] / mass;
      if (x[i] == 0.0) throw NonPositiveIterate("perron: iterate coordinate hit zero (reducible operator?)");
    }
  }
  res.rho = 0.5 * (lo + hi);
  res.cw_lower = lo;
  res.cw_upper = hi;
  throw IterationLimit("perron: bracket [" + std::to_string(lo) + ", " + std::to_string(hi) +
                       "] still wider than the tolerance after max_iter");
}

// Spectrum shift A + I preserves the Perron vector of a nonnegative matrix;
// handles reducible or nilpotent operators.
inline PerronResult perron_shifted(const MatVec& op, std::size_t n, const PerronOptions& opt = {}) {
  const double sigma = 1.0;
  MatVec shifted = [&op, sigma](const std::vector<double>& v) {
    std::vector<double> out = op(v);
    for (std::size_t i = 0; i < v.size(); ++i) out[i] += sigma * v[i];
    return out;
  };
  PerronResult res = perron(shifted, n, opt);
  res.rho -= sigma;
  res.cw_lower -= sigma;
  res.cw_upper -= sigma;
  return res;
}

inline MatVec dense_op(const Matrix& a) {
  return [&a](const std::vector<double>& v) { return a.matvec(v); };
}

inline PerronResult perron(const Matrix& a, const PerronOptions& opt = {}) {
  return perron(dense_op(a), a.rows(), opt);
}

inline PerronResult perron_shifted(const Matrix& a, const PerronOptions& opt = {}) {
  return perron_shifted(dense_op(a), a.rows(), opt);
}

}  // namespace mfgc
