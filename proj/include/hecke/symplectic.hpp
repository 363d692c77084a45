#pragma once

// The paramodular side: similitudes (1/sqrt(m)) M in Sp_2, the groups
// Sigma_N and Sigma*_N, Atkin-Lehner elements W_d, the isomorphism onto
// SO_0(S^_N), and double cosets / Hecke products with respect to Sigma_N.

#include "hecke/hecke.hpp"

#include <array>
#include <map>
#include <mutex>
#include <random>

namespace hecke {

// Entry (i,j) of a paramodular matrix lies in shape_lattice(i,j) * Z:
//   [ 1  N  1  1  ]
//   [ 1  1  1  1/N]
//   [ 1  N  1  1  ]
//   [ N  N  N  1  ]
inline Rat shape_lattice(const Level &level, std::size_t i, std::size_t j) {
  static constexpr int pattern[4][4] = {{0, 1, 0, 0}, {0, 0, 0, -1}, {0, 1, 0, 0}, {1, 1, 1, 0}};
  switch (pattern[i][j]) {
  case 1:
    return Rat(level.value());
  case -1:
    return Rat(Int(1), level.value());
  default:
    return Rat(1);
  }
}

inline bool has_paramodular_shape(const RatMat &m, const Level &level) {
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      if (denom(m(i, j) / shape_lattice(level, i, j)) != 1)
        return false;
  return true;
}

inline RatMat symplectic_j() {
  RatMat j(4, 4);
  j(0, 2) = -1;
  j(1, 3) = -1;
  j(2, 0) = 1;
  j(3, 1) = 1;
  return j;
}

inline bool is_symplectic_similitude(const RatMat &m, const Rat &factor) {
  const RatMat j = symplectic_j();
  return m.rows() == 4 && m.cols() == 4 && m.transpose() * j * m == factor * j;
}

// Membership in Sigma_N: symplectic with the paramodular integrality pattern.
inline bool is_paramodular(const RatMat &m, const Level &level) {
  return is_symplectic_similitude(m, Rat(1)) && has_paramodular_shape(m, level);
}

// +-(1/sqrt(scale)) * mat, stored with scale = nu (the least m such that
// sqrt(m) times the element has the paramodular shape) and mat = sqrt(nu) * element.
// The sign is fixed by making the first non-zero entry positive.
class SympElement {
public:
  static SympElement make(const Level &level, const RatMat &mat, const Int &scale) {
    if (mat.rows() != 4 || mat.cols() != 4)
      throw MembershipError("symplectic element must be 4x4");
    if (scale <= 0)
      throw MembershipError("similitude factor must be positive");
    if (!is_symplectic_similitude(mat, Rat(scale)))
      throw MembershipError("matrix is not a symplectic similitude with factor " + scale.str());
    return normalized(level, mat, scale);
  }
  static SympElement make(const Level &level, const IntMat &mat, const Int &scale) {
    return make(level, to_rat(mat), scale);
  }

  static SympElement identity(const Level &level) { return SympElement(level, to_rat(IntMat::identity(4)), 1); }

  const Level &level() const { return level_; }
  const RatMat &mat() const { return mat_; }
  const Int &scale() const { return scale_; }
  const Int &nu() const { return scale_; }
  bool in_sigma() const { return scale_ == 1; }

  SympElement inverse() const {
    const RatMat j = symplectic_j();
    return normalized(level_, -(j * mat_.transpose() * j), scale_);
  }

  friend SympElement operator*(const SympElement &a, const SympElement &b) {
    if (!(a.level_ == b.level_))
      throw ArithmeticError("product of paramodular elements of different levels");
    return normalized(a.level_, a.mat_ * b.mat_, a.scale_ * b.scale_);
  }

  friend bool operator==(const SympElement &a, const SympElement &b) {
    return a.level_ == b.level_ && a.scale_ == b.scale_ && a.mat_ == b.mat_;
  }

  std::string str() const { return "(1/sqrt(" + scale_.str() + "))*" + mat_.str(); }

private:
  SympElement(Level level, RatMat mat, Int scale) : level_(level), mat_(std::move(mat)), scale_(std::move(scale)) {}

  static SympElement normalized(const Level &level, const RatMat &mat, const Int &scale) {
    Int f = 1, m0 = 1;
    for (const auto &[p, e] : factorize(scale)) {
      f *= ipow(p, e / 2);
      if (e % 2)
        m0 *= p;
    }
    // t = least positive integer with (t/f) mat of paramodular shape.
    Int den = 1;
    std::vector<Rat> y;
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) {
        y.push_back(mat(i, j) / (Rat(f) * shape_lattice(level, i, j)));
        den = lcm(den, denom(y.back()));
      }
    Int num = 0;
    for (const auto &q : y)
      num = gcd(num, numer(q * Rat(den)));
    if (num == 0)
      throw ArithmeticError("zero matrix is not a similitude");
    const Int t = den / gcd(num, den);
    RatMat out = mat;
    const Rat factor(t, f);
    bool negate = false, seen = false;
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 4; ++j) {
        out(i, j) *= factor;
        if (!seen && out(i, j) != 0) {
          seen = true;
          negate = out(i, j) < 0;
        }
      }
    if (negate)
      out = -out;
    return SympElement(level, std::move(out), m0 * t * t);
  }

  Level level_;
  RatMat mat_;
  Int scale_;
};

inline Int nu(const SympElement &m) { return m.nu(); }

// J_N = [[0, -I^-1], [I, 0]], I = diag(1, N)
inline SympElement j_n(const Level &level) {
  RatMat m(4, 4);
  m(0, 2) = -1;
  m(1, 3) = Rat(Int(-1), level.value());
  m(2, 0) = 1;
  m(3, 1) = Rat(level.value());
  return SympElement::make(level, m, 1);
}

// (1/sqrt(s)) diag(a1, a2, s/a1, s/a2)
inline SympElement diagonal_element(const Level &level, const Rat &a1, const Rat &a2, const Int &s) {
  RatMat m(4, 4);
  m(0, 0) = a1;
  m(1, 1) = a2;
  m(2, 2) = Rat(s) / a1;
  m(3, 3) = Rat(s) / a2;
  return SympElement::make(level, m, s);
}

// ---------------------------------------------------------------------------
// Atkin-Lehner elements

struct AtkinLehner {
  Int d, alpha, beta, gamma, delta;

  // W_d = diag(V_d, V_d'^-1), V_d = (1/sqrt d) [[alpha d, beta N], [gamma, delta d]]
  SympElement element(const Level &level) const {
    const Int n = level.value();
    if (d <= 0 || !level.divisible_by(d))
      throw ArithmeticError("W_d requires d | N (got d = " + d.str() + ")");
    if (alpha * delta * d - beta * gamma * (n / d) != 1)
      throw ArithmeticError("W_d coefficients violate alpha delta d - beta gamma N/d = 1");
    IntMat m(4, 4);
    m(0, 0) = alpha * d;
    m(0, 1) = beta * n;
    m(1, 0) = gamma;
    m(1, 1) = delta * d;
    m(2, 2) = delta * d;
    m(2, 3) = -gamma;
    m(3, 2) = -beta * n;
    m(3, 3) = alpha * d;
    return SympElement::make(level, m, d);
  }
};

inline AtkinLehner make_W(const Level &level, const Int &d) {
  if (d <= 0 || !level.divisible_by(d))
    throw ArithmeticError("W_d requires d | N (got d = " + d.str() + ", N = " + level.value().str() + ")");
  const Int e = level.value() / d;
  if (d == 1)
    return {1, 1, 0, 0, 1};
  if (e == 1)
    return {d, 0, 1, -1, 0};
  auto [g, x, y] = ext_gcd(d, e);
  (void)g;
  (void)y;
  const Int alpha = mod_floor(x, e);
  return {d, alpha, (alpha * d - 1) / e, 1, 1};
}

inline SympElement w_element(const Level &level, const Int &d) { return make_W(level, d).element(level); }

// ---------------------------------------------------------------------------
// phi_N and the isomorphism Sp_2 / {+-1} -> SO_0(S^_N)

inline std::array<GaussRat, 3> phi(const Level &level, const GaussMat &z) {
  if (z.rows() != 2 || z.cols() != 2 || !(z(0, 1) == z(1, 0)))
    throw ArithmeticError("phi_N expects a symmetric 2x2 matrix");
  return {z(0, 0), z(0, 1), GaussRat(Rat(level.value())) * z(1, 1)};
}

inline GaussMat phi_inverse(const Level &level, const std::array<GaussRat, 3> &z) {
  GaussMat m(2, 2);
  m(0, 0) = z[0];
  m(0, 1) = m(1, 0) = z[1];
  m(1, 1) = z[2] / GaussRat(Rat(level.value()));
  return m;
}

namespace detail {

inline RatMat adj2(const RatMat &x) {
  RatMat r(2, 2);
  r(0, 0) = x(1, 1);
  r(0, 1) = -x(0, 1);
  r(1, 0) = -x(1, 0);
  r(1, 1) = x(0, 0);
  return r;
}

inline Rat det2(const RatMat &x) { return x(0, 0) * x(1, 1) - x(0, 1) * x(1, 0); }

inline std::array<Rat, 3> phi_rat(const Level &level, const RatMat &p) {
  if (p(0, 1) != p(1, 0))
    throw InvariantError("phi_N applied to a non-symmetric block product");
  return {p(0, 0), p(0, 1), Rat(level.value()) * p(1, 1)};
}

// S_N v
inline std::array<Rat, 3> sn_apply(const Level &level, const std::array<Rat, 3> &v) {
  return {v[2], Rat(-2 * level.value()) * v[1], v[0]};
}

// The quadratic map M -> M~ before division by the similitude factor:
//   alpha = det A, a = -phi(A#B), beta = -N det B,
//   b = -phi(AC#)/N, K z = phi(A Z D# + B Z# C#), c = phi(BD#),
//   gamma = -det C/N, d = phi(C#D)/N, delta = det D,
// with first row (alpha, a'S_N, beta) and last row (gamma, d'S_N, delta).
inline RatMat orthogonal_image(const Level &level, const RatMat &m) {
  const Rat n(level.value());
  const RatMat a = m.block(0, 0, 2, 2), b = m.block(0, 2, 2, 2), c = m.block(2, 0, 2, 2), d = m.block(2, 2, 2, 2);
  const RatMat as = adj2(a), cs = adj2(c), ds = adj2(d);
  RatMat r(5, 5);
  r(0, 0) = det2(a);
  r(0, 4) = -n * det2(b);
  r(4, 0) = -det2(c) / n;
  r(4, 4) = det2(d);
  auto av = phi_rat(level, as * b);
  for (auto &x : av)
    x = -x;
  const auto sa = sn_apply(level, av);
  auto dv = phi_rat(level, cs * d);
  for (auto &x : dv)
    x /= n;
  const auto sd = sn_apply(level, dv);
  const auto bv = phi_rat(level, a * cs);
  const auto cv = phi_rat(level, b * ds);
  for (int i = 0; i < 3; ++i) {
    r(0, 1 + i) = sa[i];
    r(4, 1 + i) = sd[i];
    r(1 + i, 0) = -bv[i] / n;
    r(1 + i, 4) = cv[i];
  }
  RatMat z1(2, 2), z2(2, 2), z3(2, 2);
  z1(0, 0) = 1;
  z2(0, 1) = z2(1, 0) = 1;
  z3(1, 1) = Rat(1) / n;
  const std::array<RatMat, 3> zs{z1, z2, z3};
  for (int k = 0; k < 3; ++k) {
    const auto col = phi_rat(level, a * zs[k] * ds + b * adj2(zs[k]) * cs);
    for (int i = 0; i < 3; ++i)
      r(1 + i, 1 + k) = col[i];
  }
  return r;
}

} // namespace detail

// M~ as an element of SO_0(S^_N; Q). `validate` re-checks orthogonality and
// the identity component.
inline OrthoElement to_orthogonal(const SympElement &m, bool validate = true) {
  RatMat r = detail::orthogonal_image(m.level(), m.mat());
  const Rat s(m.scale());
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j)
      r(i, j) /= s;
  if (validate)
    return OrthoElement::from_rational(build_form(m.level(), 5), r);
  auto [mat, den] = clear_denominators(r);
  return OrthoElement::trusted(m.level(), 5, std::move(mat), std::move(den));
}

// Image of Sigma_N in Gamma^_N: center entry = 1 mod 2N.
inline bool in_discriminant_kernel(const OrthoElement &e) {
  if (e.dim() != 5 || !e.is_integral())
    throw MembershipError("discriminant kernel test needs an element of Gamma^_N");
  return mod_floor(e.mat()(2, 2) - 1, 2 * e.level().value()) == 0;
}

// (AZ + B)(CZ + D)^-1; the scalar 1/sqrt(m) cancels.
inline GaussMat siegel_action(const SympElement &m, const GaussMat &z) {
  const GaussMat g = to_gauss(m.mat());
  const GaussMat a = g.block(0, 0, 2, 2), b = g.block(0, 2, 2, 2), c = g.block(2, 0, 2, 2), d = g.block(2, 2, 2, 2);
  const GaussMat num = a * z + b, den = c * z + d;
  const GaussRat det = den(0, 0) * den(1, 1) - den(0, 1) * den(1, 0);
  if (det.is_zero())
    throw ArithmeticError("CZ + D is singular");
  GaussMat inv(2, 2);
  inv(0, 0) = den(1, 1) / det;
  inv(0, 1) = -den(0, 1) / det;
  inv(1, 0) = -den(1, 0) / det;
  inv(1, 1) = den(0, 0) / det;
  return num * inv;
}

// ---------------------------------------------------------------------------
// Double cosets with respect to Sigma*_N and Sigma_N

// Sigma*_N (1/sqrt(u^2 v)) diag(1, u, u^2 v, u v) Sigma*_N
struct SigmaStarLabel {
  Int u = 1, v = 1;

  SympElement representative(const Level &level) const { return diagonal_element(level, 1, Rat(u), u * u * v); }
  // Image (1/(uv)) diag(1, v, uv, u^2 v, u^2 v^2)
  OrthoDoubleCosetLabel orthogonal_label() const { return make_label({1, v, u * v, u * u * v, u * u * v * v}); }
  std::string str() const { return "(u=" + u.str() + ",v=" + v.str() + ")"; }

  friend bool operator==(const SigmaStarLabel &, const SigmaStarLabel &) = default;
  friend std::ostream &operator<<(std::ostream &os, const SigmaStarLabel &l) { return os << l.str(); }
  friend bool operator<(const SigmaStarLabel &a, const SigmaStarLabel &b) {
    return std::tie(a.u, a.v) < std::tie(b.u, b.v);
  }
};

inline SigmaStarLabel sigma_star_from_orthogonal(const OrthoDoubleCosetLabel &l) {
  if (l.dim != 5 || l.invariants[0] != 1)
    throw InvariantError("orthogonal label " + l.str() + " is not reduced");
  const Int v = l.invariants[1];
  const SigmaStarLabel s{l.m / v, v};
  if (s.u * s.v != l.m || !(s.orthogonal_label() == l))
    throw InvariantError("orthogonal label " + l.str() + " has no diagonal symplectic form");
  return s;
}

inline SigmaStarLabel sigma_star_canonical(const SympElement &m) {
  return sigma_star_from_orthogonal(double_coset_canonical(to_orthogonal(m, false)));
}

// Sigma_N W_d (1/sqrt(u1^2 u2^2 v)) diag(u1, u2, u1 u2^2 v, u1^2 u2 v) Sigma_N
struct ParamodCosetLabel {
  Int d = 1, u1 = 1, u2 = 1, v = 1;

  static ParamodCosetLabel unit() { return {}; }

  Int u() const { return u1 * u2; }
  Int nu() const { return d * u() * u() * v; }
  SigmaStarLabel star() const { return {u(), v}; }

  SympElement representative(const Level &level) const {
    return w_element(level, d) * diagonal_element(level, Rat(u1), Rat(u2), u1 * u1 * u2 * u2 * v);
  }

  bool is_valid(const Level &level) const {
    if (d < 1 || u1 < 1 || u2 < 1 || v < 1 || !level.divisible_by(d) || gcd(u1, u2) != 1)
      return false;
    for (const auto &[p, e] : factorize(u1))
      if (!level.divisible_by(p))
        return false;
    return true;
  }

  std::string str() const {
    return "W_" + d.str() + "(" + u1.str() + "," + u2.str() + "," + v.str() + ")";
  }

  friend bool operator==(const ParamodCosetLabel &, const ParamodCosetLabel &) = default;
  friend std::ostream &operator<<(std::ostream &os, const ParamodCosetLabel &l) { return os << l.str(); }
  friend bool operator<(const ParamodCosetLabel &a, const ParamodCosetLabel &b) {
    return std::tuple(a.nu(), a.d, a.u1, a.u2, a.v) < std::tuple(b.nu(), b.d, b.u1, b.u2, b.v);
  }
};

// Canonical Sigma_N double coset: (u, v) from the Sigma*_N class, d from nu,
// and each p-part of u (p | N) assigned to u1 iff the outer block (rows and
// columns 1, 3) of sqrt(nu) W_d^-1 M vanishes mod p.
inline ParamodCosetLabel sigma_canonical(const SympElement &m) {
  const Level &level = m.level();
  const SigmaStarLabel star = sigma_star_canonical(m);
  const Int uu = star.u * star.u * star.v;
  if (m.nu() % uu != 0)
    throw InvariantError("nu(M) = " + m.nu().str() + " is not divisible by u^2 v = " + uu.str());
  const Int d = m.nu() / uu;
  if (!level.divisible_by(d))
    throw InvariantError("nu(M) / (u^2 v) = " + d.str() + " does not divide N");
  const SympElement m1 = w_element(level, d).inverse() * m;
  if (m1.nu() != uu)
    throw InvariantError("W_d^-1 M has unexpected nu");
  Int u1 = 1;
  for (const auto &[p, e] : factorize(star.u)) {
    if (!level.divisible_by(p))
      continue;
    bool outer_zero = true;
    for (std::size_t i : {0u, 2u})
      for (std::size_t j : {0u, 2u})
        if (numer(m1.mat()(i, j)) % p != 0)
          outer_zero = false;
    if (outer_zero)
      u1 *= ipow(p, e);
  }
  ParamodCosetLabel label{d, u1, star.u / u1, star.v};
  if (!label.is_valid(level) || label.nu() != m.nu())
    throw InvariantError("inconsistent paramodular label " + label.str());
  return label;
}

// ---------------------------------------------------------------------------
// Preimages of canonical orthogonal forms

// h with h~ = (1/m) * form: T_S diag(A_t, A_t'^-1) (1/sqrt(a* delta)) diag(a*, m, delta, a* delta/m)
// with S = phi^-1(c/delta), A_t = [[1, N t], [0, 1]], t = mu/delta*.
inline SympElement preimage(const Level &level, const RightCosetForm5 &f) {
  const Rat n(level.value());
  const Rat delta(f.delta);
  RatMat ts = to_rat(IntMat::identity(4));
  ts(0, 2) = Rat(f.c[0]) / delta;
  ts(0, 3) = ts(1, 2) = Rat(f.c[1]) / delta;
  ts(1, 3) = Rat(f.c[2]) / (n * delta);
  const Rat t = n * Rat(f.inner.mu) / Rat(f.inner.delta_star);
  RatMat ut = to_rat(IntMat::identity(4));
  ut(0, 1) = t;
  ut(3, 2) = -t;
  const Int &astar = f.inner.alpha_star, &m = f.inner.m;
  const SympElement h = SympElement::make(level, ts, 1) * SympElement::make(level, ut, 1) *
                        diagonal_element(level, Rat(astar), Rat(m), astar * f.delta);
  const OrthoElement expected = OrthoElement::trusted(level, 5, f.assemble(level), m);
  if (!(to_orthogonal(h, false) == expected))
    throw InvariantError("preimage does not map onto the canonical form");
  return h;
}

// Inverse of M -> M~ on the inputs where it is available at point level:
// J* and canonical right-coset forms (which include the diagonal forms).
inline SympElement to_symplectic(const OrthoElement &e) {
  if (e.dim() != 5)
    throw MembershipError("to_symplectic needs a 5x5 orthogonal element");
  if (e.is_integral() && e.mat() == gen::j_star())
    return j_n(e.level());
  const auto red = reduce_right_coset(e);
  if (red.canonical == e)
    return preimage(e.level(), std::get<RightCosetForm5>(red.form));
  throw MembershipError("element is not a canonical form or J*: the isomorphism is not invertible at point level "
                        "for this input");
}

// ---------------------------------------------------------------------------
// Random words (test support)

namespace detail {

inline std::vector<SympElement> sigma_pool(const Level &level) {
  const Rat n(level.value());
  std::vector<SympElement> pool;
  auto add = [&](RatMat m) { pool.push_back(SympElement::make(level, m, 1)); };
  const std::array<std::array<int, 3>, 5> params{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {-1, 1, 0}, {0, -1, -1}}};
  for (const auto &s : params) {
    RatMat t = to_rat(IntMat::identity(4)); // [[E, S], [0, E]]
    t(0, 2) = s[0];
    t(0, 3) = t(1, 2) = s[1];
    t(1, 3) = Rat(s[2]) / n;
    add(t);
    RatMat l = to_rat(IntMat::identity(4)); // [[E, 0], [T, E]]
    l(2, 0) = s[0];
    l(2, 1) = l(3, 0) = n * s[1];
    l(3, 1) = n * s[2];
    add(l);
  }
  for (const auto &f : hecke::detail::sl2_pool()) { // SL_2(Z) on coordinates 1, 3
    RatMat e = to_rat(IntMat::identity(4));
    e(0, 0) = Rat(f(0, 0));
    e(0, 2) = Rat(f(0, 1));
    e(2, 0) = Rat(f(1, 0));
    e(2, 2) = Rat(f(1, 1));
    add(e);
  }
  const std::array<std::array<int, 4>, 4> us{{{1, 1, 0, 1}, {1, 0, 1, 1}, {1, -1, 0, 1}, {-1, 0, 0, -1}}};
  for (const auto &u : us) { // diag(U, U'^-1), U = [[a1, a2 N], [a3, a4]]
    RatMat e(4, 4);
    e(0, 0) = u[0];
    e(0, 1) = n * u[1];
    e(1, 0) = u[2];
    e(1, 1) = u[3];
    e(2, 2) = u[3];
    e(2, 3) = -u[2];
    e(3, 2) = -n * u[1];
    e(3, 3) = u[0];
    add(e);
  }
  pool.push_back(j_n(level));
  return pool;
}

} // namespace detail

// Deterministic random word in generators of Sigma_N (or Sigma*_N when
// `extended`, adding the W_d).
inline SympElement random_sigma_element(const Level &level, std::uint64_t seed, int word_length,
                                        bool extended = false) {
  auto pool = detail::sigma_pool(level);
  if (extended)
    for (const Int &d : level.divisors())
      if (d > 1)
        pool.push_back(w_element(level, d));
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  SympElement m = SympElement::identity(level);
  for (int i = 0; i < word_length; ++i)
    m = m * pool[pick(rng)];
  return m;
}

// ---------------------------------------------------------------------------
// Hecke algebra of (Sigma_N, G)

using ParamodHeckeElement = LinearCombination<ParamodCosetLabel>;

// Sigma_N right coset of g: (canonical form R of Gamma^_N g~, e) where
// g in Sigma_N W_e h and h~ = R.
struct SigmaCosetKey {
  std::vector<Int> form;
  Int e;
  friend bool operator==(const SigmaCosetKey &, const SigmaCosetKey &) = default;
  friend bool operator<(const SigmaCosetKey &a, const SigmaCosetKey &b) {
    return std::tie(a.e, a.form) < std::tie(b.e, b.form);
  }
};

struct SigmaCosetTable {
  ParamodCosetLabel label;
  std::vector<SympElement> reps;
  std::size_t size() const { return reps.size(); }
};

namespace detail {

inline std::vector<Int> form_key(const RightCosetForm5 &f) {
  return {f.alpha, f.delta, f.inner.alpha_star, f.inner.m, f.inner.delta_star, f.inner.mu, f.c[0], f.c[1], f.c[2]};
}

} // namespace detail

class SigmaHeckeContext {
public:
  explicit SigmaHeckeContext(HeckeContext &orth) : orth_(orth) {}

  const Level &level() const { return orth_.level(); }
  HeckeContext &orthogonal() { return orth_; }

  SigmaCosetKey key(const SympElement &g) {
    const auto red = reduce_right_coset(to_orthogonal(g, false));
    const auto &form = std::get<RightCosetForm5>(red.form);
    auto fk = detail::form_key(form);
    const SympElement h = cached_preimage(fk, form);
    const Int e = (g * h.inverse()).nu();
    if (!level().divisible_by(e))
      throw InvariantError("g h^-1 is not in Sigma*_N");
    return {std::move(fk), e};
  }

  const SigmaCosetTable &table(const ParamodCosetLabel &label) {
    {
      std::lock_guard lock(mutex_);
      if (auto it = tables_.find(label); it != tables_.end())
        return *it->second;
    }
    if (!label.is_valid(level()))
      throw InvariantError("invalid paramodular label " + label.str());
    const auto &star_table = orth_.table(label.star().orthogonal_label());
    std::vector<std::optional<SympElement>> hs(star_table.size());
    parallel_for(hs.size(), orth_.jobs(), [&](std::size_t i) {
      hs[i] = preimage(level(), star_table.forms[i]);
    });
    SigmaCosetTable t{label, {}};
    for (const Int &e : level().divisors()) {
      const SympElement w = w_element(level(), e);
      for (const auto &h : hs) {
        SympElement g = w * *h;
        if (sigma_canonical(g) == label)
          t.reps.push_back(std::move(g));
      }
    }
    std::lock_guard lock(mutex_);
    auto [it, inserted] = tables_.emplace(label, std::make_unique<SigmaCosetTable>(std::move(t)));
    return *it->second;
  }

  const SigmaCosetKey &distinguished_key(const ParamodCosetLabel &label) {
    {
      std::lock_guard lock(mutex_);
      if (auto it = dist_.find(label); it != dist_.end())
        return it->second;
    }
    SigmaCosetKey k = key(label.representative(level()));
    std::lock_guard lock(mutex_);
    return dist_.emplace(label, std::move(k)).first->second;
  }

private:
  SympElement cached_preimage(const std::vector<Int> &fk, const RightCosetForm5 &form) {
    {
      std::lock_guard lock(mutex_);
      if (auto it = preimages_.find(fk); it != preimages_.end())
        return it->second;
    }
    SympElement h = preimage(level(), form);
    std::lock_guard lock(mutex_);
    return preimages_.emplace(fk, std::move(h)).first->second;
  }

  HeckeContext &orth_;
  std::mutex mutex_;
  std::map<ParamodCosetLabel, std::unique_ptr<SigmaCosetTable>> tables_;
  std::map<ParamodCosetLabel, SigmaCosetKey> dist_;
  std::map<std::vector<Int>, SympElement> preimages_;
};

inline ParamodHeckeElement sigma_multiply_labels(SigmaHeckeContext &ctx, const ParamodCosetLabel &x,
                                                 const ParamodCosetLabel &y) {
  const auto &a = ctx.table(x);
  const auto &b = ctx.table(y);
  std::vector<std::map<ParamodCosetLabel, std::pair<Int, Int>>> partial(a.size());
  parallel_for(a.size(), ctx.orthogonal().jobs(), [&](std::size_t i) {
    for (const auto &bj : b.reps) {
      const SympElement prod = a.reps[i] * bj;
      const ParamodCosetLabel l = sigma_canonical(prod);
      auto &t = partial[i][l];
      ++t.first;
      if (ctx.key(prod) == ctx.distinguished_key(l))
        ++t.second;
    }
  });
  std::map<ParamodCosetLabel, std::pair<Int, Int>> total;
  for (const auto &p : partial)
    for (const auto &[l, t] : p) {
      total[l].first += t.first;
      total[l].second += t.second;
    }
  ParamodHeckeElement out;
  for (const auto &[l, t] : total) {
    if (t.second == 0 || t.first % t.second != 0)
      throw InvariantError("inconsistent structure constant for " + l.str() + " in " + x.str() + " * " + y.str());
    out.add(l, t.second);
  }
  return out;
}

inline ParamodHeckeElement sigma_multiply(SigmaHeckeContext &ctx, const ParamodHeckeElement &x,
                                          const ParamodHeckeElement &y) {
  ParamodHeckeElement out;
  for (const auto &[d, cd] : x.terms())
    for (const auto &[e, ce] : y.terms())
      out += (cd * ce) * sigma_multiply_labels(ctx, d, e);
  return out;
}

inline Int sigma_degree(SigmaHeckeContext &ctx, const ParamodHeckeElement &x) {
  Int s = 0;
  for (const auto &[l, c] : x.terms())
    s += c * Int(ctx.table(l).size());
  return s;
}

// Sigma_N double cosets of the generators.
inline ParamodCosetLabel sigma_label_w(const Int &d) { return {d, 1, 1, 1}; }
// T_{N,1}(p) = Sigma_N (1/sqrt p) diag(1, 1, p, p) Sigma_N
inline ParamodCosetLabel sigma_label_t1(const Int &p) { return {1, 1, 1, p}; }
// T_{N,2}(p) = Sigma_N (1/p) diag(1, p, p^2, p) Sigma_N
inline ParamodCosetLabel sigma_label_t2(const Int &p) { return {1, 1, p, 1}; }

} // namespace hecke
