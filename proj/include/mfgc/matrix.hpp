#pragma once

#include <cassert>
#include <cstddef>
#include <vector>

#include "mfgc/common.hpp"

namespace mfgc {

// Dense row-major matrix, just enough linear algebra for the certificates.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  const std::vector<double>& data() const { return data_; }

  std::vector<double> matvec(const std::vector<double>& v) const {
    assert(v.size() == cols_);
    std::vector<double> out(rows_, 0.0);
    for (std::size_t r = 0; r < rows_; ++r) {
      double s = 0.0;
      const double* row = &data_[r * cols_];
      for (std::size_t c = 0; c < cols_; ++c) s += row[c] * v[c];
      out[r] = s;
    }
    return out;
  }

  std::vector<double> tmatvec(const std::vector<double>& v) const {
    assert(v.size() == rows_);
    std::vector<double> out(cols_, 0.0);
    for (std::size_t r = 0; r < rows_; ++r) {
      const double* row = &data_[r * cols_];
      for (std::size_t c = 0; c < cols_; ++c) out[c] += row[c] * v[r];
    }
    return out;
  }

  Matrix multiply(const Matrix& other) const {
    assert(cols_ == other.rows_);
    Matrix out(rows_, other.cols_, 0.0);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t k = 0; k < cols_; ++k) {
        double a = (*this)(r, k);
        if (a == 0.0) continue;
        for (std::size_t c = 0; c < other.cols_; ++c) out(r, c) += a * other(k, c);
      }
    return out;
  }

  Matrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
    Matrix out(nr, nc);
    for (std::size_t r = 0; r < nr; ++r)
      for (std::size_t c = 0; c < nc; ++c) out(r, c) = (*this)(r0 + r, c0 + c);
    return out;
  }

  // max absolute column sum
  double norm1() const {
    double best = 0.0;
    for (std::size_t c = 0; c < cols_; ++c) {
      double s = 0.0;
      for (std::size_t r = 0; r < rows_; ++r) s += std::abs((*this)(r, c));
      best = std::max(best, s);
    }
    return best;
  }

  bool nonnegative() const {
    for (double x : data_)
      if (x < 0.0) return false;
    return true;
  }

  static Matrix identity(std::size_t n) {
    Matrix out(n, n);
    for (std::size_t i = 0; i < n; ++i) out(i, i) = 1.0;
    return out;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Gelfand estimate ||A^(2^k)||_1^(1/2^k) by repeated squaring with
// rescaling; library-free spectral radius for nonnegative matrices.
inline double gelfand_spectral_radius(const Matrix& a, int max_squarings = 40) {
  double log_scale = 0.0;
  Matrix b = a;
  double prev = -std::numeric_limits<double>::infinity();
  for (int k = 1; k <= max_squarings; ++k) {
    double s = b.norm1();
    if (s == 0.0) return 0.0;
    Matrix nb(b.rows(), b.cols());
    for (std::size_t r = 0; r < b.rows(); ++r)
      for (std::size_t c = 0; c < b.cols(); ++c) nb(r, c) = b(r, c) / s;
    b = nb.multiply(nb);
    log_scale = 2.0 * (log_scale + std::log(s));
    double est = (log_scale + std::log(std::max(b.norm1(), 1e-300))) / std::pow(2.0, k);
    if (std::abs(est - prev) <= 1e-13) return std::exp(est);
    prev = est;
  }
  return std::exp(prev);
}

// Solves A X = B in place via LU with partial pivoting. B holds X on return.
inline Matrix lu_solve(Matrix a, Matrix b) {
  const std::size_t n = a.rows();
  assert(a.cols() == n && b.rows() == n);
  std::vector<std::size_t> piv(n);
  for (std::size_t i = 0; i < n; ++i) piv[i] = i;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    double best = std::abs(a(k, k));
    for (std::size_t r = k + 1; r < n; ++r)
      if (std::abs(a(r, k)) > best) {
        best = std::abs(a(r, k));
        p = r;
      }
    if (best == 0.0) throw Error("lu_solve: singular matrix");
    if (p != k) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a(k, c), a(p, c));
      for (std::size_t c = 0; c < b.cols(); ++c) std::swap(b(k, c), b(p, c));
    }
    for (std::size_t r = k + 1; r < n; ++r) {
      double f = a(r, k) / a(k, k);
      a(r, k) = f;
      for (std::size_t c = k + 1; c < n; ++c) a(r, c) -= f * a(k, c);
      for (std::size_t c = 0; c < b.cols(); ++c) b(r, c) -= f * b(k, c);
    }
  }
  for (std::size_t rk = n; rk-- > 0;) {
    for (std::size_t c = 0; c < b.cols(); ++c) {
      double s = b(rk, c);
      for (std::size_t j = rk + 1; j < n; ++j) s -= a(rk, j) * b(j, c);
      b(rk, c) = s / a(rk, rk);
    }
  }
  return b;
}

}  // namespace mfgc
