#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <span>
#include <cmath>
#include <numeric>
#include <vector>

#include "chnet/matrix.hpp"
#include "chnet/rng.hpp"

namespace testing {

inline chnet::RealMatrix random_matrix(std::size_t r, std::size_t c, chnet::RngStream& s,
                                       double scale = 1.0) {
  chnet::RealMatrix m(r, c);
  for (double& v : m.data()) v = scale * s.normal();
  return m;
}

inline chnet::RealVector random_vector(std::size_t n, chnet::RngStream& s, double scale = 1.0) {
  chnet::RealVector v(n);
  for (double& x : v) x = scale * s.normal();
  return v;
}

inline chnet::RealMatrix naive_matmul(const chnet::RealMatrix& a, const chnet::RealMatrix& b) {
  chnet::RealMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      long double s = 0;
      for (std::size_t p = 0; p < a.cols(); ++p) s += (long double)a(i, p) * b(p, j);
      c(i, j) = static_cast<double>(s);
    }
  return c;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double max_abs_diff(const chnet::RealMatrix& a, const chnet::RealMatrix& b) {
  return max_abs_diff(a.data(), b.data());
}

inline double max_abs(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

/// Uniformly random permutation of 0..n-1 (Fisher-Yates).
inline std::vector<std::size_t> random_permutation(std::size_t n, chnet::RngStream& s) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) std::swap(p[i - 1], p[s.below(i)]);
  return p;
}

}  // namespace testing

namespace testing {

/// FNV-1a over the bit patterns of a sequence of doubles.
inline std::uint64_t digest(std::span<const double> v, std::uint64_t h = 0xcbf29ce484222325ull) {
  for (double d : v) {
    auto bits = std::bit_cast<std::uint64_t>(d);
    for (int i = 0; i < 8; ++i) {
      h ^= (bits >> (8 * i)) & 0xffu;
      h *= 0x100000001b3ull;
    }
  }
  return h;
}

}  // namespace testing
