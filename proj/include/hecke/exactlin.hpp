#pragma once

// Exact integer / rational / Gaussian-rational matrix arithmetic.
//
// Everything downstream (orthogonal groups, Hecke algebras, the symplectic
// side) is built on the types in this header. There is no floating point
// anywhere in the library.

#include "hecke/errors.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace hecke {

using Int = boost::multiprecision::cpp_int;
// cpp_rational keeps numerator/denominator in lowest terms with a positive
// denominator after every operation.
using Rat = boost::multiprecision::cpp_rational;

inline Int numer(const Rat &q) { return boost::multiprecision::numerator(q); }
inline Int denom(const Rat &q) { return boost::multiprecision::denominator(q); }

inline Int abs_int(const Int &a) { return a < 0 ? Int(-a) : a; }

inline Int gcd(const Int &a, const Int &b) {
  return boost::multiprecision::gcd(abs_int(a), abs_int(b));
}

inline Int lcm(const Int &a, const Int &b) {
  if (a == 0 || b == 0)
    return 0;
  return abs_int(a / gcd(a, b) * b);
}

// Returns (g, x, y) with a*x + b*y = g = gcd(a, b) >= 0.
inline std::tuple<Int, Int, Int> ext_gcd(const Int &a, const Int &b) {
  Int old_r = a, r = b, old_s = 1, s = 0, old_t = 0, t = 1;
  while (r != 0) {
    Int q = old_r / r;
    Int tmp = old_r - q * r;
    old_r = r;
    r = tmp;
    tmp = old_s - q * s;
    old_s = s;
    s = tmp;
    tmp = old_t - q * t;
    old_t = t;
    t = tmp;
  }
  if (old_r < 0) {
    old_r = -old_r;
    old_s = -old_s;
    old_t = -old_t;
  }
  return {old_r, old_s, old_t};
}

// Floor division and the matching non-negative remainder (b > 0).
inline Int floor_div(const Int &a, const Int &b) {
  Int q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0)))
    --q;
  return q;
}

inline Int mod_floor(const Int &a, const Int &b) { return a - floor_div(a, b) * b; }

inline bool divides(const Int &d, const Int &a) {
  if (d == 0)
    return a == 0;
  return a % d == 0;
}

inline bool is_prime(const Int &n) {
  if (n < 2)
    return false;
  if (n < 4)
    return true;
  if (n % 2 == 0)
    return false;
  for (Int q = 3; q * q <= n; q += 2)
    if (n % q == 0)
      return false;
  return true;
}

// Prime factorization by trial division: (prime, exponent) pairs, ascending.
inline std::vector<std::pair<Int, unsigned>> factorize(Int n) {
  std::vector<std::pair<Int, unsigned>> out;
  if (n < 0)
    n = -n;
  for (Int q = 2; q * q <= n; ++q) {
    unsigned e = 0;
    while (n % q == 0) {
      n /= q;
      ++e;
    }
    if (e)
      out.emplace_back(q, e);
  }
  if (n > 1)
    out.emplace_back(n, 1u);
  return out;
}

inline bool is_squarefree(const Int &n) {
  for (const auto &[q, e] : factorize(n))
    if (e > 1)
      return false;
  return n != 0;
}

// Positive divisors in ascending order.
inline std::vector<Int> divisors(const Int &n) {
  std::vector<Int> out{1};
  for (const auto &[q, e] : factorize(n)) {
    const std::size_t old = out.size();
    Int pw = 1;
    for (unsigned k = 1; k <= e; ++k) {
      pw *= q;
      for (std::size_t i = 0; i < old; ++i)
        out.push_back(out[i] * pw);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

// If n = p^r for a prime p and r >= 1 returns (p, r); (1, 0) for n == 1;
// (0, 0) otherwise.
inline std::pair<Int, unsigned> prime_power(const Int &n) {
  if (n == 1)
    return {1, 0};
  auto f = factorize(n);
  if (f.size() != 1)
    return {0, 0};
  return f.front();
}

inline Int ipow(Int base, unsigned e) {
  Int r = 1;
  while (e) {
    if (e & 1u)
      r *= base;
    base *= base;
    e >>= 1u;
  }
  return r;
}

inline std::string to_string(const Int &a) { return a.str(); }

inline std::string to_string(const Rat &q) {
  if (denom(q) == 1)
    return numer(q).str();
  return numer(q).str() + "/" + denom(q).str();
}

// ---------------------------------------------------------------------------
// Dense row-major matrix with value semantics.

template <class T> class Matrix {
public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
  Matrix(std::initializer_list<std::initializer_list<T>> rows) {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    data_.reserve(rows_ * cols_);
    for (const auto &r : rows) {
      if (r.size() != cols_)
        throw ArithmeticError("ragged matrix literal");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
      m(i, i) = T(1);
    return m;
  }

  static Matrix diagonal(std::span<const T> d) {
    Matrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i)
      m(i, i) = d[i];
    return m;
  }
  static Matrix diagonal(std::initializer_list<T> d) {
    return diagonal(std::span<const T>(d.begin(), d.size()));
  }

  static Matrix column(std::span<const T> v) {
    Matrix m(v.size(), 1);
    for (std::size_t i = 0; i < v.size(); ++i)
      m(i, 0) = v[i];
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  const T &operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  T &operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }

  std::span<const T> entries() const { return data_; }

  std::vector<T> col(std::size_t j) const {
    std::vector<T> v(rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      v[i] = (*this)(i, j);
    return v;
  }
  std::vector<T> row(std::size_t i) const {
    return std::vector<T>(data_.begin() + i * cols_, data_.begin() + (i + 1) * cols_);
  }

  Matrix transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j)
        t(j, i) = (*this)(i, j);
    return t;
  }

  Matrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
    Matrix b(nr, nc);
    for (std::size_t i = 0; i < nr; ++i)
      for (std::size_t j = 0; j < nc; ++j)
        b(i, j) = (*this)(r0 + i, c0 + j);
    return b;
  }

  bool is_zero() const {
    return std::all_of(data_.begin(), data_.end(), [](const T &x) { return x == 0; });
  }

  friend bool operator==(const Matrix &a, const Matrix &b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }
  friend bool operator<(const Matrix &a, const Matrix &b) {
    return std::tie(a.rows_, a.cols_, a.data_) < std::tie(b.rows_, b.cols_, b.data_);
  }

  friend Matrix operator*(const Matrix &a, const Matrix &b) {
    if (a.cols_ != b.rows_)
      throw ArithmeticError("matrix product: dimension mismatch");
    Matrix c(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const T &aik = a(i, k);
        if (aik == 0)
          continue;
        for (std::size_t j = 0; j < b.cols_; ++j)
          c(i, j) += aik * b(k, j);
      }
    return c;
  }
  friend Matrix operator+(Matrix a, const Matrix &b) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_)
      throw ArithmeticError("matrix sum: dimension mismatch");
    for (std::size_t i = 0; i < a.data_.size(); ++i)
      a.data_[i] += b.data_[i];
    return a;
  }
  friend Matrix operator-(Matrix a, const Matrix &b) {
    if (a.rows_ != b.rows_ || a.cols_ != b.cols_)
      throw ArithmeticError("matrix difference: dimension mismatch");
    for (std::size_t i = 0; i < a.data_.size(); ++i)
      a.data_[i] -= b.data_[i];
    return a;
  }
  friend Matrix operator-(Matrix a) {
    for (auto &x : a.data_)
      x = -x;
    return a;
  }
  friend Matrix operator*(const T &s, Matrix a) {
    for (auto &x : a.data_)
      x *= s;
    return a;
  }

  std::vector<T> apply(std::span<const T> v) const {
    if (v.size() != cols_)
      throw ArithmeticError("matrix-vector product: dimension mismatch");
    std::vector<T> out(rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j)
        out[i] += (*this)(i, j) * v[j];
    return out;
  }

  friend std::ostream &operator<<(std::ostream &os, const Matrix &m) {
    os << '[';
    for (std::size_t i = 0; i < m.rows_; ++i) {
      os << (i ? ",[" : "[");
      for (std::size_t j = 0; j < m.cols_; ++j)
        os << (j ? "," : "") << m(i, j);
      os << ']';
    }
    return os << ']';
  }

  std::string str() const {
    std::ostringstream os;
    os << *this;
    return os.str();
  }

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using IntMat = Matrix<Int>;
using RatMat = Matrix<Rat>;

inline RatMat to_rat(const IntMat &a) {
  RatMat r(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      r(i, j) = Rat(a(i, j));
  return r;
}

inline bool is_integral(const RatMat &a) {
  for (const auto &x : a.entries())
    if (denom(x) != 1)
      return false;
  return true;
}

inline IntMat to_int(const RatMat &a) {
  IntMat r(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      if (denom(a(i, j)) != 1)
        throw ArithmeticError("matrix is not integral");
      r(i, j) = numer(a(i, j));
    }
  return r;
}

// gcd of all entries (0 for the zero matrix).
inline Int content(const IntMat &a) {
  Int g = 0;
  for (const auto &x : a.entries())
    g = gcd(g, x);
  return g;
}

// Writes a rational matrix as (1/d)*M with M integral and d >= 1 minimal.
inline std::pair<IntMat, Int> clear_denominators(const RatMat &a) {
  Int d = 1;
  for (const auto &x : a.entries())
    d = lcm(d, denom(x));
  IntMat m(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      m(i, j) = numer(a(i, j)) * (d / denom(a(i, j)));
  return {m, d};
}

// Fraction-free (Bareiss) determinant.
inline Int det(const IntMat &a) {
  if (!a.square())
    throw ArithmeticError("determinant of a non-square matrix");
  const std::size_t n = a.rows();
  if (n == 0)
    return 1;
  IntMat m = a;
  Int sign = 1, prev = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (m(k, k) == 0) {
      std::size_t swap = k + 1;
      while (swap < n && m(swap, k) == 0)
        ++swap;
      if (swap == n)
        return 0;
      for (std::size_t j = 0; j < n; ++j)
        std::swap(m(k, j), m(swap, j));
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i)
      for (std::size_t j = k + 1; j < n; ++j)
        m(i, j) = (m(i, j) * m(k, k) - m(i, k) * m(k, j)) / prev;
    prev = m(k, k);
  }
  return sign * m(n - 1, n - 1);
}

inline Rat det(const RatMat &a) {
  auto [m, d] = clear_denominators(a);
  return Rat(det(m)) / Rat(ipow(d, static_cast<unsigned>(a.rows())));
}

// Adjugate: returns (B, s) with A*B = s*identity and s = det(A) != 0.
inline std::pair<IntMat, Int> inverse_scaled(const IntMat &a) {
  if (!a.square())
    throw ArithmeticError("inverse of a non-square matrix");
  const std::size_t n = a.rows();
  const Int d = det(a);
  if (d == 0)
    throw ArithmeticError("matrix is singular");
  IntMat adj(n, n);
  if (n == 1) {
    adj(0, 0) = 1;
    return {adj, d};
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      IntMat minor(n - 1, n - 1);
      for (std::size_t r = 0, rr = 0; r < n; ++r) {
        if (r == j)
          continue;
        for (std::size_t c = 0, cc = 0; c < n; ++c) {
          if (c == i)
            continue;
          minor(rr, cc++) = a(r, c);
        }
        ++rr;
      }
      const Int cof = det(minor);
      adj(i, j) = ((i + j) % 2 == 0) ? cof : Int(-cof);
    }
  return {adj, d};
}

inline RatMat inverse(const RatMat &a) {
  auto [m, d] = clear_denominators(a);
  auto [adj, s] = inverse_scaled(m);
  RatMat r(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      r(i, j) = Rat(adj(i, j) * d) / Rat(s);
  return r;
}

// ---------------------------------------------------------------------------
// Smith normal form.

struct SmithData {
  std::vector<Int> invariants; // d1 | d2 | ... ; trailing zeros for singular input
  IntMat left_transform;       // U
  IntMat right_transform;      // V, with U*A*V = diag(invariants)
};

// Euclidean reduction with the minimal-absolute-value entry as pivot.
inline SmithData smith_normal_form(const IntMat &a) {
  const std::size_t m = a.rows(), n = a.cols();
  IntMat d = a;
  IntMat u = IntMat::identity(m);
  IntMat v = IntMat::identity(n);

  auto swap_rows = [&](std::size_t r1, std::size_t r2) {
    if (r1 == r2)
      return;
    for (std::size_t j = 0; j < n; ++j)
      std::swap(d(r1, j), d(r2, j));
    for (std::size_t j = 0; j < m; ++j)
      std::swap(u(r1, j), u(r2, j));
  };
  auto swap_cols = [&](std::size_t c1, std::size_t c2) {
    if (c1 == c2)
      return;
    for (std::size_t i = 0; i < m; ++i)
      std::swap(d(i, c1), d(i, c2));
    for (std::size_t i = 0; i < n; ++i)
      std::swap(v(i, c1), v(i, c2));
  };
  // row_dst += q * row_src
  auto add_row = [&](std::size_t dst, std::size_t src, const Int &q) {
    for (std::size_t j = 0; j < n; ++j)
      d(dst, j) += q * d(src, j);
    for (std::size_t j = 0; j < m; ++j)
      u(dst, j) += q * u(src, j);
  };
  auto add_col = [&](std::size_t dst, std::size_t src, const Int &q) {
    for (std::size_t i = 0; i < m; ++i)
      d(i, dst) += q * d(i, src);
    for (std::size_t i = 0; i < n; ++i)
      v(i, dst) += q * v(i, src);
  };

  const std::size_t k = std::min(m, n);
  for (std::size_t t = 0; t < k; ++t) {
    bool exhausted = false;
    for (;;) {
      std::size_t pi = t, pj = t;
      Int best = -1;
      for (std::size_t i = t; i < m; ++i)
        for (std::size_t j = t; j < n; ++j)
          if (d(i, j) != 0 && (best < 0 || abs_int(d(i, j)) < best)) {
            best = abs_int(d(i, j));
            pi = i;
            pj = j;
          }
      if (best < 0) {
        exhausted = true;
        break;
      }
      swap_rows(t, pi);
      swap_cols(t, pj);

      bool clean = true;
      for (std::size_t i = t + 1; i < m; ++i)
        if (d(i, t) != 0) {
          add_row(i, t, Int(-(d(i, t) / d(t, t))));
          if (d(i, t) != 0)
            clean = false;
        }
      for (std::size_t j = t + 1; j < n; ++j)
        if (d(t, j) != 0) {
          add_col(j, t, Int(-(d(t, j) / d(t, t))));
          if (d(t, j) != 0)
            clean = false;
        }
      if (!clean)
        continue;

      // The pivot must divide the remaining block.
      bool fixed = false;
      for (std::size_t i = t + 1; i < m && !fixed; ++i)
        for (std::size_t j = t + 1; j < n; ++j)
          if (d(i, j) % d(t, t) != 0) {
            add_row(t, i, Int(1));
            fixed = true;
            break;
          }
      if (!fixed)
        break;
    }
    if (exhausted)
      break;
    if (d(t, t) < 0) {
      for (std::size_t j = 0; j < n; ++j)
        d(t, j) = -d(t, j);
      for (std::size_t j = 0; j < m; ++j)
        u(t, j) = -u(t, j);
    }
  }

  SmithData out;
  out.invariants.reserve(k);
  for (std::size_t t = 0; t < k; ++t)
    out.invariants.push_back(d(t, t));
  out.left_transform = std::move(u);
  out.right_transform = std::move(v);
  return out;
}

inline std::vector<Int> smith_invariants(const IntMat &a) { return smith_normal_form(a).invariants; }

// Rank over the field with p elements.
inline std::size_t rank_mod_p(const IntMat &a, const Int &p) {
  if (!is_prime(p))
    throw ArithmeticError("rank_mod_p: modulus " + p.str() + " is not prime");
  IntMat m(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      m(i, j) = mod_floor(a(i, j), p);
  std::size_t rank = 0;
  for (std::size_t c = 0; c < m.cols() && rank < m.rows(); ++c) {
    std::size_t piv = rank;
    while (piv < m.rows() && m(piv, c) == 0)
      ++piv;
    if (piv == m.rows())
      continue;
    for (std::size_t j = 0; j < m.cols(); ++j)
      std::swap(m(rank, j), m(piv, j));
    const Int inv = mod_floor(std::get<1>(ext_gcd(m(rank, c), p)), p);
    for (std::size_t j = 0; j < m.cols(); ++j)
      m(rank, j) = mod_floor(m(rank, j) * inv, p);
    for (std::size_t i = 0; i < m.rows(); ++i) {
      if (i == rank || m(i, c) == 0)
        continue;
      const Int f = m(i, c);
      for (std::size_t j = 0; j < m.cols(); ++j)
        m(i, j) = mod_floor(m(i, j) - f * m(rank, j), p);
    }
    ++rank;
  }
  return rank;
}

// ---------------------------------------------------------------------------
// Gaussian rationals.

struct GaussRat {
  Rat re;
  Rat im;

  GaussRat() = default;
  GaussRat(Rat r) : re(std::move(r)) {}
  GaussRat(Rat r, Rat i) : re(std::move(r)), im(std::move(i)) {}
  GaussRat(int r) : re(r) {}

  static GaussRat i() { return {Rat(0), Rat(1)}; }

  GaussRat conj() const { return {re, -im}; }
  Rat norm() const { return re * re + im * im; }
  bool is_zero() const { return re == 0 && im == 0; }

  friend GaussRat operator+(const GaussRat &a, const GaussRat &b) { return {a.re + b.re, a.im + b.im}; }
  friend GaussRat operator-(const GaussRat &a, const GaussRat &b) { return {a.re - b.re, a.im - b.im}; }
  friend GaussRat operator-(const GaussRat &a) { return {-a.re, -a.im}; }
  friend GaussRat operator*(const GaussRat &a, const GaussRat &b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }
  friend GaussRat operator/(const GaussRat &a, const GaussRat &b) {
    const Rat n = b.norm();
    if (n == 0)
      throw ArithmeticError("division by zero (Gaussian rational)");
    const GaussRat t = a * b.conj();
    return {t.re / n, t.im / n};
  }
  GaussRat &operator+=(const GaussRat &b) { return *this = *this + b; }
  GaussRat &operator-=(const GaussRat &b) { return *this = *this - b; }
  GaussRat &operator*=(const GaussRat &b) { return *this = *this * b; }

  friend bool operator==(const GaussRat &a, const GaussRat &b) { return a.re == b.re && a.im == b.im; }

  friend std::ostream &operator<<(std::ostream &os, const GaussRat &z) {
    return os << '(' << to_string(z.re) << (z.im < 0 ? "" : "+") << to_string(z.im) << "i)";
  }
};

using GaussMat = Matrix<GaussRat>;

inline GaussMat to_gauss(const RatMat &a) {
  GaussMat g(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      g(i, j) = GaussRat(a(i, j));
  return g;
}

} // namespace hecke
