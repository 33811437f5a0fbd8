#include "qnn/random.hpp"

namespace qnn {

namespace {

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Xoshiro256pp::Xoshiro256pp(std::uint64_t seed) {
  std::uint64_t state = seed;
  for (auto& word : s_) word = splitmix64(state);
}

Xoshiro256pp::result_type Xoshiro256pp::next() {
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Xoshiro256pp::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

Vector Xoshiro256pp::uniform_vector(std::size_t n) {
  Vector v(n);
  for (double& x : v) x = uniform();
  return v;
}

Vector Xoshiro256pp::uniform_vector(std::size_t n, double lo, double hi) {
  Vector v(n);
  for (double& x : v) x = uniform(lo, hi);
  return v;
}

Matrix Xoshiro256pp::uniform_matrix(std::size_t rows, std::size_t cols) {
  Matrix m(rows, cols);
  for (double& x : m.data()) x = uniform();
  return m;
}

}  // namespace qnn
