#pragma once

// Test-only reference computations. Deliberately naive and independent of the
// library's algorithms: Laplace expansion instead of Bareiss, gcd of minors
// instead of Euclidean Smith reduction, exhaustive search instead of
// canonical forms.

#include "hecke/exactlin.hpp"

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace hecke::oracle {

inline Int laplace_det(const IntMat &a) {
  const std::size_t n = a.rows();
  if (n == 0)
    return 1;
  if (n == 1)
    return a(0, 0);
  Int s = 0;
  for (std::size_t j = 0; j < n; ++j) {
    if (a(0, j) == 0)
      continue;
    IntMat minor(n - 1, n - 1);
    for (std::size_t r = 1; r < n; ++r)
      for (std::size_t c = 0, cc = 0; c < n; ++c)
        if (c != j)
          minor(r - 1, cc++) = a(r, c);
    const Int t = a(0, j) * laplace_det(minor);
    s += (j % 2 == 0) ? t : Int(-t);
  }
  return s;
}

inline void combinations(std::size_t n, std::size_t k, const std::function<void(const std::vector<std::size_t> &)> &f) {
  std::vector<std::size_t> idx(k);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t pos, std::size_t start) {
    if (pos == k) {
      f(idx);
      return;
    }
    for (std::size_t i = start; i < n; ++i) {
      idx[pos] = i;
      rec(pos + 1, i + 1);
    }
  };
  rec(0, 0);
}

// Determinantal divisors D_k = gcd of all k x k minors; invariants d_k = D_k / D_{k-1}.
inline std::vector<Int> smith_by_minors(const IntMat &a) {
  const std::size_t r = std::min(a.rows(), a.cols());
  std::vector<Int> dk(r + 1);
  dk[0] = 1;
  for (std::size_t k = 1; k <= r; ++k) {
    Int g = 0;
    combinations(a.rows(), k, [&](const std::vector<std::size_t> &rows) {
      combinations(a.cols(), k, [&](const std::vector<std::size_t> &cols) {
        IntMat m(k, k);
        for (std::size_t i = 0; i < k; ++i)
          for (std::size_t j = 0; j < k; ++j)
            m(i, j) = a(rows[i], cols[j]);
        g = gcd(g, laplace_det(m));
      });
    });
    dk[k] = g;
  }
  std::vector<Int> inv;
  for (std::size_t k = 1; k <= r; ++k)
    inv.push_back(dk[k - 1] == 0 ? Int(0) : Int(dk[k] / dk[k - 1]));
  return inv;
}

inline IntMat random_matrix(std::mt19937_64 &rng, std::size_t rows, std::size_t cols, int lo, int hi) {
  std::uniform_int_distribution<int> dist(lo, hi);
  IntMat m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      m(i, j) = dist(rng);
  return m;
}

} // namespace hecke::oracle
