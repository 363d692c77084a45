#pragma once

// Integral orthogonal groups of the even forms S_N (signature (1,2)) and
// S^_N = H + S_N + H (signature (2,3)), their rational extensions, and
// canonical right / double coset representatives.
//
// Matrices act on column vectors. An element of the rational group is
// stored as (1/m) * M with M integral, m >= 1 and gcd(content(M), m) = 1.

#include "hecke/errors.hpp"
#include "hecke/exactlin.hpp"

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

namespace hecke {

// ---------------------------------------------------------------------------
// Level

class Level {
public:
  // Throws LevelError unless n is a positive squarefree integer.
  explicit Level(std::int64_t n) : n_(n) {
    if (n < 1)
      throw LevelError("level must be a positive integer (got " + std::to_string(n) + ")");
    if (!is_squarefree(Int(n)))
      throw LevelError("level must be squarefree (got N = " + std::to_string(n) +
                       "); for non-squarefree N isotropic vectors need not reduce, e.g. "
                       "N = 4, g = (2,1,2)' keeps even first and last entries under the whole group");
  }

  std::int64_t n() const { return n_; }
  Int value() const { return Int(n_); }
  bool divisible_by(const Int &p) const { return Int(n_) % p == 0; }
  std::vector<Int> divisors() const { return hecke::divisors(Int(n_)); }
  std::vector<Int> prime_divisors() const {
    std::vector<Int> out;
    for (const auto &[q, e] : factorize(Int(n_)))
      out.push_back(q);
    return out;
  }

  friend bool operator==(const Level &, const Level &) = default;
  friend auto operator<=>(const Level &, const Level &) = default;

private:
  std::int64_t n_;
};

// ---------------------------------------------------------------------------
// Quadratic forms

inline IntMat gram3(const Level &level) {
  return IntMat{{0, 0, 1}, {0, Int(-2 * level.n()), 0}, {1, 0, 0}};
}

inline IntMat gram5(const Level &level) {
  IntMat g(5, 5);
  g(0, 4) = 1;
  g(4, 0) = 1;
  g(1, 3) = 1;
  g(3, 1) = 1;
  g(2, 2) = -2 * level.n();
  return g;
}

struct QuadForm {
  Level level;
  int dim; // 3 or 5
  IntMat gram;

  // S[g] = g' * gram * g
  Int value(std::span<const Int> g) const {
    const auto sg = gram.apply(g);
    Int s = 0;
    for (std::size_t i = 0; i < g.size(); ++i)
      s += g[i] * sg[i];
    return s;
  }

  friend bool operator==(const QuadForm &a, const QuadForm &b) { return a.level == b.level && a.dim == b.dim; }
};

inline QuadForm build_form(const Level &level, int dim) {
  if (dim == 3)
    return {level, 3, gram3(level)};
  if (dim == 5)
    return {level, 5, gram5(level)};
  throw ArithmeticError("quadratic form dimension must be 3 or 5");
}

// S_N[z] for complex z = (tau1, w, tau2).
inline GaussRat sn_value(const Level &level, std::span<const GaussRat> z) {
  return GaussRat(2) * z[0] * z[2] - GaussRat(Rat(2 * level.n())) * z[1] * z[1];
}

// Fractional-linear action of a 5x5 matrix on the orthogonal half-space:
// z -> (-S[z]/2 * b + K z + c) / (-S[z]/2 * gamma + d'S z + delta).
// The scalar in front of (1/m)M cancels, so the integral part may be passed.
struct HalfSpaceImage {
  std::array<GaussRat, 3> z;
  GaussRat automorphy; // the denominator M{z}
};

template <class T>
std::optional<HalfSpaceImage> half_space_action(const Matrix<T> &m, const Level &level,
                                                std::span<const GaussRat> z) {
  const GaussRat q = sn_value(level, z);
  const std::array<GaussRat, 5> hom{GaussRat(Rat(-1, 2)) * q, z[0], z[1], z[2], GaussRat(1)};
  std::array<GaussRat, 5> w{};
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j)
      if (m(i, j) != 0)
        w[i] += GaussRat(Rat(m(i, j))) * hom[j];
  if (w[4].is_zero())
    return std::nullopt;
  return HalfSpaceImage{{w[1] / w[4], w[2] / w[4], w[3] / w[4]}, w[4]};
}

inline bool in_half_space(const Level &level, std::span<const GaussRat> z) {
  const Rat &y1 = z[0].im, &y2 = z[1].im, &y3 = z[2].im;
  return y1 > 0 && (2 * y1 * y3 - 2 * level.n() * y2 * y2) > 0;
}

// ---------------------------------------------------------------------------
// Identity-component test
//
// dim 3: K is in SO_0 iff y0' S_N (K y0) > 0 for y0 = (1,0,1)', i.e. K keeps
// the positive cone component of y0.
// dim 5: M is in SO_0 iff it maps z0 = (i t, 0, i)' into the half-space,
// t = 1, 2, ... the first value with non-vanishing automorphy factor.
inline bool is_in_so0_matrix(const IntMat &mat, const Level &level) {
  if (mat.rows() == 3) {
    const Int w0 = mat(0, 0) + mat(0, 2);
    const Int w2 = mat(2, 0) + mat(2, 2);
    return w0 + w2 > 0;
  }
  if (mat.rows() == 5) {
    for (int t = 1; t < 64; ++t) {
      const std::array<GaussRat, 3> z0{GaussRat(Rat(0), Rat(t)), GaussRat(0), GaussRat(Rat(0), Rat(1))};
      auto img = half_space_action(mat, level, z0);
      if (img)
        return in_half_space(level, img->z);
    }
    throw InvariantError("is_in_so0: automorphy factor vanishes at every base point tried");
  }
  throw ArithmeticError("is_in_so0: dimension must be 3 or 5");
}

inline bool is_orthogonal_similitude(const IntMat &mat, const Int &m, const QuadForm &form) {
  if (mat.rows() != static_cast<std::size_t>(form.dim) || !mat.square())
    return false;
  return mat.transpose() * form.gram * mat == (m * m) * form.gram;
}

// Precondition: mat'*gram*mat = m^2*gram and det = m^dim. Throws
// MembershipError otherwise.
inline bool is_in_so0(const IntMat &mat, const Int &m, const QuadForm &form) {
  if (!is_orthogonal_similitude(mat, m, form))
    throw MembershipError("is_in_so0: matrix does not preserve the quadratic form up to m^2");
  if (det(mat) != ipow(m, static_cast<unsigned>(form.dim)))
    throw MembershipError("is_in_so0: determinant is not m^dim");
  return is_in_so0_matrix(mat, form.level);
}

// ---------------------------------------------------------------------------
// OrthoElement

class OrthoElement {
public:
  // Reduces the fraction and validates orthogonality, determinant and the
  // identity component.
  static OrthoElement make(const QuadForm &form, IntMat mat, Int m) {
    if (mat.rows() != static_cast<std::size_t>(form.dim) || !mat.square())
      throw MembershipError("element has wrong dimension for the form");
    if (m == 0)
      throw MembershipError("denominator must be non-zero");
    if (m < 0) {
      m = -m;
      mat = -mat;
    }
    OrthoElement e(form.level, form.dim, std::move(mat), std::move(m));
    e.reduce();
    if (!is_orthogonal_similitude(e.mat_, e.denom_, form))
      throw MembershipError("matrix does not satisfy M' S M = m^2 S");
    if (det(e.mat_) != ipow(e.denom_, static_cast<unsigned>(form.dim)))
      throw MembershipError("determinant of M is not m^dim");
    if (!is_in_so0_matrix(e.mat_, form.level))
      throw MembershipError("element is not in the identity component SO_0");
    return e;
  }

  static OrthoElement from_rational(const QuadForm &form, const RatMat &r) {
    auto [mat, d] = clear_denominators(r);
    return make(form, std::move(mat), std::move(d));
  }

  static OrthoElement identity(const QuadForm &form) {
    return OrthoElement(form.level, form.dim, IntMat::identity(form.dim), Int(1));
  }

  // Trusted construction for values known to be valid (products, inverses
  // and outputs of the canonical-form routines). Still reduces the fraction.
  static OrthoElement trusted(const Level &level, int dim, IntMat mat, Int m) {
    OrthoElement e(level, dim, std::move(mat), std::move(m));
    e.reduce();
    return e;
  }

  const Level &level() const { return level_; }
  int dim() const { return dim_; }
  QuadForm form() const { return build_form(level_, dim_); }
  const IntMat &mat() const { return mat_; }
  const Int &denom() const { return denom_; }
  bool is_integral() const { return denom_ == 1; }

  RatMat as_rational() const {
    RatMat r = to_rat(mat_);
    for (std::size_t i = 0; i < r.rows(); ++i)
      for (std::size_t j = 0; j < r.cols(); ++j)
        r(i, j) /= Rat(denom_);
    return r;
  }

  // (1/m M)^-1 = (1/m) S^-1 M' S.
  OrthoElement inverse() const {
    const IntMat g = dim_ == 3 ? gram3(level_) : gram5(level_);
    const RatMat ginv = hecke::inverse(to_rat(g));
    RatMat r = ginv * to_rat(mat_.transpose() * g);
    for (std::size_t i = 0; i < r.rows(); ++i)
      for (std::size_t j = 0; j < r.cols(); ++j)
        r(i, j) /= Rat(denom_);
    auto [m, d] = clear_denominators(r);
    return trusted(level_, dim_, std::move(m), std::move(d));
  }

  friend OrthoElement operator*(const OrthoElement &a, const OrthoElement &b) {
    if (!(a.level_ == b.level_) || a.dim_ != b.dim_)
      throw ArithmeticError("product of elements of different orthogonal groups");
    return trusted(a.level_, a.dim_, a.mat_ * b.mat_, a.denom_ * b.denom_);
  }

  friend bool operator==(const OrthoElement &a, const OrthoElement &b) {
    return a.level_ == b.level_ && a.dim_ == b.dim_ && a.denom_ == b.denom_ && a.mat_ == b.mat_;
  }

private:
  OrthoElement(Level level, int dim, IntMat mat, Int m)
      : level_(level), dim_(dim), mat_(std::move(mat)), denom_(std::move(m)) {}

  void reduce() {
    const Int g = gcd(content(mat_), denom_);
    if (g > 1) {
      for (std::size_t i = 0; i < mat_.rows(); ++i)
        for (std::size_t j = 0; j < mat_.cols(); ++j)
          mat_(i, j) /= g;
      denom_ /= g;
    }
  }

  Level level_;
  int dim_;
  IntMat mat_;
  Int denom_;
};

// ---------------------------------------------------------------------------
// Generators

namespace gen {

inline IntMat k_mu(const Level &level, const Int &mu) {
  const Int n = level.value();
  return IntMat{{1, 2 * n * mu, n * mu * mu}, {0, 1, mu}, {0, 0, 1}};
}

inline IntMat k_tilde_mu(const Level &level, const Int &mu) {
  const Int n = level.value();
  return IntMat{{1, 0, 0}, {mu, 1, 0}, {n * mu * mu, 2 * n * mu, 1}};
}

inline IntMat v_matrix() { return IntMat{{0, 0, -1}, {0, 1, 0}, {-1, 0, 0}}; }

// Image of B/sqrt(d) (det B = d) under SL_2(R) -> SO_0(S_N; R), acting on
// z = (tau1, w, N tau2) through the symmetric matrix [[tau1, w], [w, tau2]].
// Integral for B in Gamma^0(N) (d = 1) and for Atkin-Lehner shaped B.
inline IntMat so3_from_sl2(const Level &level, const IntMat &b, const Int &d) {
  const Rat n(level.value());
  const Rat b11(b(0, 0)), b12(b(0, 1)), b21(b(1, 0)), b22(b(1, 1)), dd(d);
  RatMat k{{b11 * b11, 2 * b11 * b12, b12 * b12 / n},
           {b11 * b21, b11 * b22 + b12 * b21, b12 * b22 / n},
           {n * b21 * b21, 2 * n * b21 * b22, b22 * b22}};
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      k(i, j) /= dd;
  if (!is_integral(k))
    throw InvariantError("so3_from_sl2: image is not integral");
  return to_int(k);
}

// Atkin-Lehner element of SO_0(S_N; Z) for d | N: image of
// (1/sqrt d) [[a d, b N], [c, e d]] with a e d - b c (N/d) = 1.
inline IntMat atkin_lehner3(const Level &level, const Int &d) {
  const Int n = level.value();
  if (d < 1 || n % d != 0)
    throw ArithmeticError("atkin_lehner3: d must divide N");
  const Int e = n / d;
  // c = 1, e_coef = 1: a d - b (N/d) = 1
  auto [g, a, t] = ext_gcd(d, e);
  if (g != 1)
    throw InvariantError("atkin_lehner3: d and N/d not coprime");
  const Int b = -t;
  IntMat bm{{a * d, b * n}, {1, d}};
  return so3_from_sl2(level, bm, d);
}

inline IntMat m_lambda(const Level &level, const std::array<Int, 3> &lam) {
  const IntMat s = gram3(level);
  const auto sl = s.apply(lam);
  Int q = 0;
  for (int i = 0; i < 3; ++i)
    q += lam[i] * sl[i];
  IntMat m = IntMat::identity(5);
  for (int j = 0; j < 3; ++j) {
    m(0, 1 + j) = -sl[j];
    m(1 + j, 4) = lam[j];
  }
  m(0, 4) = -q / 2;
  return m;
}

inline IntMat m_tilde_lambda(const Level &level, const std::array<Int, 3> &lam) {
  const IntMat s = gram3(level);
  const auto sl = s.apply(lam);
  Int q = 0;
  for (int i = 0; i < 3; ++i)
    q += lam[i] * sl[i];
  IntMat m = IntMat::identity(5);
  for (int j = 0; j < 3; ++j) {
    m(1 + j, 0) = lam[j];
    m(4, 1 + j) = -sl[j];
  }
  m(4, 0) = -q / 2;
  return m;
}

inline IntMat j_star() {
  IntMat m(5, 5);
  m(0, 4) = -1;
  m(4, 0) = -1;
  m(1, 3) = -1;
  m(2, 2) = 1;
  m(3, 1) = -1;
  return m;
}

inline void check_sl2(const IntMat &f) {
  if (f.rows() != 2 || f.cols() != 2 || f(0, 0) * f(1, 1) - f(0, 1) * f(1, 0) != 1)
    throw MembershipError("F must be a 2x2 integral matrix with determinant 1");
}

inline IntMat m_f(const IntMat &f) {
  check_sl2(f);
  IntMat m(5, 5);
  m(0, 0) = f(0, 0);
  m(0, 1) = f(0, 1);
  m(1, 0) = f(1, 0);
  m(1, 1) = f(1, 1);
  m(2, 2) = 1;
  m(3, 3) = f(0, 0);
  m(3, 4) = -f(0, 1);
  m(4, 3) = -f(1, 0);
  m(4, 4) = f(1, 1);
  return m;
}

inline IntMat m_tilde_f(const IntMat &f) {
  check_sl2(f);
  const Int &a = f(0, 0), &b = f(0, 1), &c = f(1, 0), &d = f(1, 1);
  IntMat m(5, 5);
  m(0, 0) = a;
  m(1, 1) = a;
  m(0, 3) = -b;
  m(1, 4) = b;
  m(2, 2) = 1;
  m(3, 0) = -c;
  m(4, 1) = c;
  m(3, 3) = d;
  m(4, 4) = d;
  return m;
}

inline IntMat k_hat(const IntMat &k) {
  IntMat m = IntMat::identity(5);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      m(1 + i, 1 + j) = k(i, j);
  return m;
}

} // namespace gen

enum class GeneratorKind { MLambda, MTildeLambda, JStar, MF, MTildeF, KHat, KMu, KTildeMu };

struct GeneratorParams {
  std::array<Int, 3> lambda{};
  IntMat f = IntMat::identity(2);
  IntMat k = IntMat::identity(3);
  Int mu = 0;
};

inline OrthoElement make_generator(const Level &level, GeneratorKind kind, const GeneratorParams &params = {}) {
  switch (kind) {
  case GeneratorKind::MLambda:
    return OrthoElement::make(build_form(level, 5), gen::m_lambda(level, params.lambda), 1);
  case GeneratorKind::MTildeLambda:
    return OrthoElement::make(build_form(level, 5), gen::m_tilde_lambda(level, params.lambda), 1);
  case GeneratorKind::JStar:
    return OrthoElement::make(build_form(level, 5), gen::j_star(), 1);
  case GeneratorKind::MF:
    return OrthoElement::make(build_form(level, 5), gen::m_f(params.f), 1);
  case GeneratorKind::MTildeF:
    return OrthoElement::make(build_form(level, 5), gen::m_tilde_f(params.f), 1);
  case GeneratorKind::KHat: {
    const QuadForm s3 = build_form(level, 3);
    if (!is_orthogonal_similitude(params.k, 1, s3) || det(params.k) != 1 || !is_in_so0_matrix(params.k, level))
      throw MembershipError("K_hat: K is not in Gamma_N");
    return OrthoElement::make(build_form(level, 5), gen::k_hat(params.k), 1);
  }
  case GeneratorKind::KMu:
    return OrthoElement::make(build_form(level, 3), gen::k_mu(level, params.mu), 1);
  case GeneratorKind::KTildeMu:
    return OrthoElement::make(build_form(level, 3), gen::k_tilde_mu(level, params.mu), 1);
  }
  throw ArithmeticError("unknown generator kind");
}

// ---------------------------------------------------------------------------
// Isotropic reduction

namespace detail {

inline void check_isotropic(const QuadForm &form, std::span<const Int> g) {
  if (std::all_of(g.begin(), g.end(), [](const Int &x) { return x == 0; }))
    throw ArithmeticError("reduce_isotropic: zero vector");
  if (form.value(g) != 0)
    throw ArithmeticError("reduce_isotropic: vector is not isotropic");
}

// Returns K in Gamma_N with K g = (gamma, 0, 0)', |gamma| = gcd(g).
//
// g spans the rank-one symmetric matrix s * v v' with v = (x, y) primitive;
// an element (1/sqrt d)[[a d, b N], [-y, x]] with d = gcd(x, N) kills the
// second coordinate of v. Solvability of a x + b y (N/d) = 1 is exactly
// where squarefreeness of N enters.
inline IntMat reduce_isotropic3_raw(const Level &level, std::span<const Int> g) {
  const Int n = level.value();
  Int x, y;
  if (g[0] != 0) {
    const Int t = gcd(g[0], g[1]);
    x = g[0] / t;
    y = g[1] / t;
  } else {
    x = 0;
    y = 1;
  }
  const Int d = gcd(x, n);
  auto [one, a, b] = ext_gcd(x, y * (n / d));
  if (one != 1)
    throw LevelError("isotropic vector cannot be reduced (level not squarefree?)");
  const IntMat bm{{a * d, b * n}, {-y, x}};
  return gen::so3_from_sl2(level, bm, d);
}

inline IntMat reduce_isotropic5_raw(const Level &level, std::vector<Int> g) {
  IntMat total = IntMat::identity(5);
  if (g[4] != 0) {
    const Int h = gcd(g[3], g[4]);
    const Int cf = g[4] / h, df = g[3] / h;
    auto [one, af, t] = ext_gcd(df, cf);
    const IntMat f{{af, -t}, {cf, df}};
    const IntMat mf = gen::m_f(f);
    g = mf.apply(g);
    total = mf * total;
  }
  if (g[1] != 0 || g[2] != 0 || g[3] != 0) {
    const std::array<Int, 3> mid{g[1], g[2], g[3]};
    const IntMat kh = gen::k_hat(reduce_isotropic3_raw(level, mid));
    g = kh.apply(g);
    total = kh * total;
  }
  {
    auto [h, s, t] = ext_gcd(g[0], g[1]);
    const IntMat gm{{s, t}, {-g[1] / h, g[0] / h}};
    const IntMat mg = gen::m_f(gm);
    g = mg.apply(g);
    total = mg * total;
  }
  if (g[0] <= 0 || g[1] != 0 || g[2] != 0 || g[3] != 0 || g[4] != 0)
    throw InvariantError("reduce_isotropic (dim 5): reduction failed");
  return total;
}

} // namespace detail

struct IsotropicReduction {
  OrthoElement k;
  Int gamma;
};

// K in Gamma_N (dim 3) resp. Gamma^_N (dim 5) with K g = (gamma, 0, ..., 0)'.
// dim 3: gamma = +-gcd(g); dim 5: gamma = gcd(g) > 0.
inline IsotropicReduction reduce_isotropic(const QuadForm &form, std::span<const Int> g) {
  if (g.size() != static_cast<std::size_t>(form.dim))
    throw ArithmeticError("reduce_isotropic: vector has wrong length");
  detail::check_isotropic(form, g);
  IntMat k = form.dim == 3 ? detail::reduce_isotropic3_raw(form.level, g)
                           : detail::reduce_isotropic5_raw(form.level, std::vector<Int>(g.begin(), g.end()));
  const auto image = k.apply(g);
  for (std::size_t i = 1; i < image.size(); ++i)
    if (image[i] != 0)
      throw InvariantError("reduce_isotropic: image is not a multiple of e1");
  return {OrthoElement::trusted(form.level, form.dim, std::move(k), 1), image[0]};
}

// ---------------------------------------------------------------------------
// Right coset canonical forms

struct RightCosetForm3 {
  Int alpha_star;
  Int m;
  Int delta_star;
  Int mu;

  // [[a*, 2 N m mu / d*, N mu^2 / d*], [0, m, mu], [0, 0, d*]]
  IntMat assemble(const Level &level) const {
    const Int n = level.value();
    const Int x = 2 * n * m * mu, y = n * mu * mu;
    if (x % delta_star != 0 || y % delta_star != 0)
      throw InvariantError("right coset form (dim 3) is not integral");
    return IntMat{{alpha_star, x / delta_star, y / delta_star}, {0, m, mu}, {0, 0, delta_star}};
  }

  friend bool operator==(const RightCosetForm3 &, const RightCosetForm3 &) = default;
};

struct RightCosetForm5 {
  Int alpha;
  Int delta;
  RightCosetForm3 inner;
  std::array<Int, 3> c;

  // [[alpha, a', beta], [0, L, c], [0, 0, delta]],
  // beta = -S_N[c] / (2 delta), a = -(1/delta) L' S_N c.
  std::optional<IntMat> try_assemble(const Level &level) const {
    const Int n = level.value();
    const Int x = 2 * n * inner.m * inner.mu, y = n * inner.mu * inner.mu;
    if (x % inner.delta_star != 0 || y % inner.delta_star != 0)
      return std::nullopt;
    const IntMat l = inner.assemble(level);
    const std::array<Int, 3> sc{c[2], -2 * n * c[1], c[0]};
    const Int sq = c[0] * sc[0] + c[1] * sc[1] + c[2] * sc[2];
    if (sq % (2 * delta) != 0)
      return std::nullopt;
    IntMat out(5, 5);
    out(0, 0) = alpha;
    out(0, 4) = -sq / (2 * delta);
    for (int j = 0; j < 3; ++j) {
      Int v = 0;
      for (int k = 0; k < 3; ++k)
        v += l(k, j) * sc[k];
      if (v % delta != 0)
        return std::nullopt;
      out(0, 1 + j) = -v / delta;
      for (int i = 0; i < 3; ++i)
        out(1 + i, 1 + j) = l(i, j);
      out(1 + j, 4) = c[j];
    }
    out(4, 4) = delta;
    return out;
  }

  IntMat assemble(const Level &level) const {
    auto m = try_assemble(level);
    if (!m)
      throw InvariantError("right coset form (dim 5) is not integral");
    return *m;
  }

  friend bool operator==(const RightCosetForm5 &, const RightCosetForm5 &) = default;
};

using RightCosetForm = std::variant<RightCosetForm3, RightCosetForm5>;

struct RightCosetReduction {
  OrthoElement gamma;      // element of the integral group with gamma * e = canonical
  RightCosetForm form;
  OrthoElement canonical;  // (1/m) * assembled form
};

namespace detail {

// Brings an integral 3x3 K with K'SK = m^2 S into the shape of the dim-3
// canonical form by left multiplication; returns (gamma, form).
inline std::pair<IntMat, RightCosetForm3> canonicalize3(const Level &level, const IntMat &k, const Int &m) {
  IntMat gamma = reduce_isotropic3_raw(level, k.col(0));
  IntMat t = gamma * k;
  if (t(1, 0) != 0 || t(2, 0) != 0 || t(2, 1) != 0)
    throw InvariantError("canonicalize3: isotropic reduction did not triangularize");
  if (t(0, 0) <= 0)
    throw MembershipError("element is not in the identity component SO_0");
  if (t(1, 1) != m || t(0, 0) * t(2, 2) != m * m)
    throw MembershipError("element does not have the expected similitude factor");
  const Int dstar = t(2, 2);
  const Int q = floor_div(t(1, 2), dstar);
  const IntMat shift = gen::k_mu(level, Int(-q));
  t = shift * t;
  gamma = shift * gamma;
  RightCosetForm3 form{t(0, 0), m, dstar, t(1, 2)};
  if (form.assemble(level) != t)
    throw InvariantError("canonicalize3: result does not match the canonical shape");
  return {gamma, form};
}

inline std::pair<IntMat, RightCosetForm5> canonicalize5(const Level &level, const IntMat &mat, const Int &m) {
  IntMat gamma = reduce_isotropic5_raw(level, mat.col(0));
  IntMat t = gamma * mat;
  for (int j = 0; j < 4; ++j)
    if (t(4, j) != 0)
      throw InvariantError("canonicalize5: last row not reduced");
  const Int alpha = t(0, 0), delta = t(4, 4);
  if (alpha * delta != m * m || delta <= 0)
    throw MembershipError("element does not have the expected similitude factor");
  auto [g3, inner] = canonicalize3(level, t.block(1, 1, 3, 3), m);
  const IntMat kh = gen::k_hat(g3);
  t = kh * t;
  gamma = kh * gamma;
  std::array<Int, 3> lam;
  for (int i = 0; i < 3; ++i)
    lam[i] = -floor_div(t(1 + i, 4), delta);
  const IntMat ml = gen::m_lambda(level, lam);
  t = ml * t;
  gamma = ml * gamma;
  RightCosetForm5 form{alpha, delta, inner, {t(1, 4), t(2, 4), t(3, 4)}};
  if (form.assemble(level) != t)
    throw InvariantError("canonicalize5: result does not match the canonical shape");
  return {gamma, form};
}

} // namespace detail

inline RightCosetReduction reduce_right_coset(const OrthoElement &e) {
  if (e.dim() == 3) {
    auto [g, form] = detail::canonicalize3(e.level(), e.mat(), e.denom());
    auto can = OrthoElement::trusted(e.level(), 3, form.assemble(e.level()), e.denom());
    return {OrthoElement::trusted(e.level(), 3, std::move(g), 1), form, std::move(can)};
  }
  auto [g, form] = detail::canonicalize5(e.level(), e.mat(), e.denom());
  auto can = OrthoElement::trusted(e.level(), 5, form.assemble(e.level()), e.denom());
  return {OrthoElement::trusted(e.level(), 5, std::move(g), 1), form, std::move(can)};
}

inline RightCosetForm right_coset_canonical(const OrthoElement &e) { return reduce_right_coset(e).form; }

// The canonical representative of the right coset Gamma * e.
inline OrthoElement canonical_right_rep(const OrthoElement &e) {
  if (e.dim() == 3) {
    auto [g, form] = detail::canonicalize3(e.level(), e.mat(), e.denom());
    return OrthoElement::trusted(e.level(), 3, form.assemble(e.level()), e.denom());
  }
  auto [g, form] = detail::canonicalize5(e.level(), e.mat(), e.denom());
  return OrthoElement::trusted(e.level(), 5, form.assemble(e.level()), e.denom());
}

// ---------------------------------------------------------------------------
// Double cosets

// Smith invariants (alpha, alpha*, m, delta*, delta) for dim 5 or
// (alpha*, m, delta*) for dim 3 of the integral part of a reduced element.
struct OrthoDoubleCosetLabel {
  int dim = 5;
  Int m = 1;
  std::vector<Int> invariants;

  static OrthoDoubleCosetLabel unit(int dim = 5) { return {dim, 1, std::vector<Int>(dim, Int(1))}; }

  // diag(invariants) / m
  OrthoElement representative(const Level &level) const {
    return OrthoElement::trusted(level, dim, IntMat::diagonal(std::span<const Int>(invariants)), m);
  }

  bool is_valid() const {
    if (invariants.size() != static_cast<std::size_t>(dim) || m < 1)
      return false;
    for (std::size_t i = 0; i + 1 < invariants.size(); ++i)
      if (invariants[i] < 1 || !divides(invariants[i], invariants[i + 1]))
        return false;
    const std::size_t mid = invariants.size() / 2;
    if (invariants[mid] != m)
      return false;
    for (std::size_t i = 0; i < mid; ++i)
      if (invariants[i] * invariants[invariants.size() - 1 - i] != m * m)
        return false;
    return true;
  }

  std::string str() const {
    std::string s = "(";
    for (std::size_t i = 0; i < invariants.size(); ++i)
      s += (i ? "," : "") + invariants[i].str();
    return s + ")/" + m.str();
  }

  friend std::ostream &operator<<(std::ostream &os, const OrthoDoubleCosetLabel &l) { return os << l.str(); }
  friend bool operator==(const OrthoDoubleCosetLabel &, const OrthoDoubleCosetLabel &) = default;
  friend bool operator<(const OrthoDoubleCosetLabel &a, const OrthoDoubleCosetLabel &b) {
    return std::tie(a.dim, a.m, a.invariants) < std::tie(b.dim, b.m, b.invariants);
  }
};

inline OrthoDoubleCosetLabel double_coset_canonical(const OrthoElement &e) {
  OrthoDoubleCosetLabel label{e.dim(), e.denom(), smith_invariants(e.mat())};
  if (!label.is_valid())
    throw InvariantError("Smith invariants " + label.str() + " violate the divisibility chain / alpha*delta = m^2");
  return label;
}

// Label of (1/m) diag(invariants); throws if the tuple is not a valid label.
inline OrthoDoubleCosetLabel make_label(std::vector<Int> invariants) {
  OrthoDoubleCosetLabel label;
  label.dim = static_cast<int>(invariants.size());
  label.m = invariants.empty() ? Int(1) : invariants[invariants.size() / 2];
  label.invariants = std::move(invariants);
  if (!label.is_valid())
    throw InvariantError("invalid double coset label " + label.str());
  return label;
}

inline OrthoDoubleCosetLabel unit_label(int dim = 5) { return make_label(std::vector<Int>(dim, Int(1))); }
// T_{N,1}(p): (1/p) diag(1, p, p, p, p^2)
inline OrthoDoubleCosetLabel label_t1(const Int &p) { return make_label({1, p, p, p, p * p}); }
// T_{N,2}(p): (1/p) diag(1, 1, p, p^2, p^2)
inline OrthoDoubleCosetLabel label_t2(const Int &p) { return make_label({1, 1, p, p * p, p * p}); }

// ---------------------------------------------------------------------------
// Random words in the generators (test support)

namespace detail {

inline std::vector<IntMat> sl2_pool() {
  return {IntMat{{1, 1}, {0, 1}}, IntMat{{1, -1}, {0, 1}}, IntMat{{1, 0}, {1, 1}}, IntMat{{1, 0}, {-1, 1}},
          IntMat{{0, -1}, {1, 0}}, IntMat{{2, 1}, {1, 1}}, IntMat{{-1, 0}, {0, -1}}};
}

inline std::vector<IntMat> generator_pool3(const Level &level) {
  std::vector<IntMat> pool;
  for (int mu : {-2, -1, 1, 2}) {
    pool.push_back(gen::k_mu(level, mu));
    pool.push_back(gen::k_tilde_mu(level, mu));
  }
  pool.push_back(-gen::v_matrix());
  for (const Int &d : level.divisors())
    if (d > 1)
      pool.push_back(gen::atkin_lehner3(level, d));
  return pool;
}

inline std::vector<IntMat> generator_pool5(const Level &level) {
  std::vector<IntMat> pool;
  const std::array<std::array<Int, 3>, 6> lams{
      {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {-1, 0, 0}, {0, -1, 0}, {1, 1, -1}}};
  for (const auto &l : lams) {
    pool.push_back(gen::m_lambda(level, l));
    pool.push_back(gen::m_tilde_lambda(level, l));
  }
  pool.push_back(gen::j_star());
  for (const auto &f : sl2_pool()) {
    pool.push_back(gen::m_f(f));
    pool.push_back(gen::m_tilde_f(f));
  }
  for (const auto &k : generator_pool3(level))
    pool.push_back(gen::k_hat(k));
  return pool;
}

} // namespace detail

// Deterministic random word of the given length in generators of Gamma_N /
// Gamma^_N.
inline OrthoElement random_group_element(const QuadForm &form, std::uint64_t seed, int word_length) {
  const auto pool = form.dim == 3 ? detail::generator_pool3(form.level) : detail::generator_pool5(form.level);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  IntMat m = IntMat::identity(form.dim);
  for (int i = 0; i < word_length; ++i)
    m = m * pool[pick(rng)];
  return OrthoElement::trusted(form.level, form.dim, std::move(m), 1);
}

} // namespace hecke
