#pragma once

#include <cstdint>
#include <limits>

#include "qnn/matrix.hpp"

namespace qnn {

/// xoshiro256++ with its state filled from splitmix64(seed).
///
/// Doubles in [0, 1) take the top 53 bits: (next() >> 11) * 2^-53. Any implementation
/// following these two rules reproduces the same weight and input streams.
class Xoshiro256pp {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256pp(std::uint64_t seed);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return next(); }
  result_type next();
  /// Uniform on [0, 1).
  double uniform();
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  Vector uniform_vector(std::size_t n);
  Vector uniform_vector(std::size_t n, double lo, double hi);
  Matrix uniform_matrix(std::size_t rows, std::size_t cols);

 private:
  std::uint64_t s_[4];
};

std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace qnn
