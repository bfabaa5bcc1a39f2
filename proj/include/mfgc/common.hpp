#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace mfgc {

// A distribution over a finite set, stored densely.
using Dist = std::vector<double>;
// One time slice of the game state: one distribution per population.
using MeasureSlice = std::vector<Dist>;

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class DegenerateProfile : public Error {
 public:
  explicit DegenerateProfile(const std::string& msg) : Error(msg) {}
};

class IterationLimit : public Error {
 public:
  explicit IterationLimit(const std::string& msg) : Error(msg) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& msg) : Error(msg) {}
};

class EmptyInterval : public Error {
 public:
  explicit EmptyInterval(const std::string& msg) : Error(msg) {}
};

class SizeLimit : public Error {
 public:
  explicit SizeLimit(const std::string& msg) : Error(msg) {}
};

class NonPositiveIterate : public Error {
 public:
  explicit NonPositiveIterate(const std::string& msg) : Error(msg) {}
};

class MajorizationViolation : public Error {
 public:
  explicit MajorizationViolation(const std::string& msg) : Error(msg) {}
};

class NotStable : public Error {
 public:
  explicit NotStable(const std::string& msg) : Error(msg) {}
};

class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& msg) : Error(msg) {}
};

inline double l1_norm(const Dist& v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

inline double l1_dist(const Dist& a, const Dist& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += std::abs(a[k] - b[k]);
  return s;
}

inline double linf_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s = std::max(s, std::abs(a[k] - b[k]));
  return s;
}

inline double sum(const Dist& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

inline bool is_distribution(const Dist& v, double tol) {
  for (double x : v)
    if (!(x >= 0.0) || !std::isfinite(x)) return false;
  return std::abs(sum(v) - 1.0) <= tol;
}

inline Dist uniform_dist(std::size_t n) { return Dist(n, 1.0 / static_cast<double>(n)); }

inline double slice_l1_dist(const MeasureSlice& a, const MeasureSlice& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += l1_dist(a[i], b[i]);
  return s;
}

// splitmix64: tiny deterministic generator for test campaigns and sampling.
// std::uniform_real_distribution is implementation-defined, so seeded runs
// would not reproduce across standard libraries; this does.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::size_t index(std::size_t n) { return static_cast<std::size_t>(next_u64() % n); }

  // random point of the probability simplex (exponential spacings)
  Dist simplex_point(std::size_t n) {
    Dist v(n);
    double s = 0.0;
    for (auto& x : v) {
      x = -std::log(1.0 - uniform());
      s += x;
    }
    for (auto& x : v) x /= s;
    return v;
  }

 private:
  std::uint64_t state_;
};

}  // namespace mfgc
