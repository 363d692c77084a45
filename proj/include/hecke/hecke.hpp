#pragma once

// Hecke algebra of (Gamma^_N, SO_0(S^_N; Q)): right-coset enumeration,
// products with integer structure constants, and the generators
// T_{N,1}(p), T_{N,2}(p) of the primary components.

#include "hecke/orthogonal.hpp"
#include "hecke/parallel.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <utility>

namespace hecke {

struct RightCosetTable {
  OrthoDoubleCosetLabel label;
  std::vector<RightCosetForm5> forms;
  std::vector<OrthoElement> reps;

  std::size_t size() const { return reps.size(); }
};

// Persistent storage for enumerated tables (implemented by the CLI cache).
class TableStore {
public:
  virtual ~TableStore() = default;
  virtual std::optional<RightCosetTable> load(const Level &level, const OrthoDoubleCosetLabel &label) = 0;
  virtual void store(const Level &level, const RightCosetTable &table) = 0;
};

// Finite Z-linear combination of double cosets.
template <class Label> class LinearCombination {
public:
  using Terms = std::map<Label, Int>;

  LinearCombination() = default;
  explicit LinearCombination(const Label &label, Int coeff = 1) { add(label, coeff); }

  static LinearCombination unit() { return LinearCombination(Label::unit()); }

  const Terms &terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  Int coeff(const Label &label) const {
    auto it = terms_.find(label);
    return it == terms_.end() ? Int(0) : it->second;
  }

  void add(const Label &label, const Int &c) {
    if (c == 0)
      return;
    auto [it, inserted] = terms_.emplace(label, c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0)
        terms_.erase(it);
    }
  }

  LinearCombination &operator+=(const LinearCombination &o) {
    for (const auto &[l, c] : o.terms_)
      add(l, c);
    return *this;
  }
  LinearCombination &operator-=(const LinearCombination &o) {
    for (const auto &[l, c] : o.terms_)
      add(l, -c);
    return *this;
  }
  friend LinearCombination operator+(LinearCombination a, const LinearCombination &b) { return a += b; }
  friend LinearCombination operator-(LinearCombination a, const LinearCombination &b) { return a -= b; }
  friend LinearCombination operator*(const Int &s, const LinearCombination &a) {
    LinearCombination r;
    for (const auto &[l, c] : a.terms_)
      r.add(l, s * c);
    return r;
  }
  friend bool operator==(const LinearCombination &, const LinearCombination &) = default;

  std::string str() const {
    if (terms_.empty())
      return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto &[l, c] : terms_) {
      os << (first ? "" : " + ") << c << "*" << l.str();
      first = false;
    }
    return os.str();
  }
  friend std::ostream &operator<<(std::ostream &os, const LinearCombination &x) { return os << x.str(); }

private:
  Terms terms_;
};

using HeckeElement = LinearCombination<OrthoDoubleCosetLabel>;

// Maximum denominator enumerated by default: p^2 for p <= 3, p otherwise,
// applied to each prime-power part of m.
inline bool within_default_bound(const Int &m) {
  for (const auto &[p, e] : factorize(m)) {
    const unsigned cap = p <= 3 ? 2 : 1;
    if (e > cap)
      return false;
  }
  return true;
}

namespace detail {

// All t in [0, mod) with a t = b (mod mod).
inline std::vector<Int> solve_linear_congruence(const Int &a, const Int &b, const Int &mod) {
  const Int am = mod_floor(a, mod), bm = mod_floor(b, mod);
  auto [g, x, y] = ext_gcd(am, mod);
  (void)y;
  if (g == 0) // a = 0 and mod = 0 cannot happen (mod >= 1)
    return {};
  if (bm % g != 0)
    return {};
  const Int step = mod / g;
  const Int t0 = mod_floor((bm / g) * x, step);
  std::vector<Int> out;
  for (Int t = t0; t < mod; t += step)
    out.push_back(t);
  return out;
}

// Columns of M' S^ must have a middle row divisible by 2N for S^-1 M' S^ to
// be integral.
inline bool scaled_inverse_integral(const Level &level, const IntMat &mat) {
  const IntMat x = mat.transpose() * gram5(level);
  const Int two_n = 2 * level.value();
  for (std::size_t j = 0; j < 5; ++j)
    if (x(2, j) % two_n != 0)
      return false;
  return true;
}

} // namespace detail

// All canonical representatives of the right cosets contained in the
// double coset `label`, by exhaustion of the finite parameter space.
inline RightCosetTable enumerate_right_cosets_raw(const Level &level, const OrthoDoubleCosetLabel &label,
                                                  unsigned jobs = 1) {
  if (label.dim != 5 || !label.is_valid())
    throw InvariantError("cannot enumerate invalid label " + label.str());
  if (label.invariants[0] != 1)
    throw InvariantError("label " + label.str() + " is not in lowest terms");
  const Int m = label.m, m2 = m * m, n = level.value();
  const QuadForm form = build_form(level, 5);

  struct Inner {
    Int alpha;
    RightCosetForm3 inner;
  };
  std::vector<Inner> heads;
  const auto divs = divisors(m2);
  for (const Int &alpha : divs)
    for (const Int &astar : divs) {
      const Int dstar = m2 / astar;
      for (Int mu = 0; mu < dstar; ++mu)
        if ((2 * n * m * mu) % dstar == 0 && (n * mu * mu) % dstar == 0)
          heads.push_back({alpha, RightCosetForm3{astar, m, dstar, mu}});
    }

  std::vector<std::vector<RightCosetForm5>> found(heads.size());
  parallel_for(heads.size(), jobs, [&](std::size_t h) {
    const Int &alpha = heads[h].alpha;
    const Int delta = m2 / alpha;
    const RightCosetForm3 &in = heads[h].inner;
    const Int x = 2 * n * m * in.mu / in.delta_star, y = n * in.mu * in.mu / in.delta_star;
    // (L' S_N c) = (a* c3, x c3 - 2N m c2, y c3 - 2N mu c2 + d* c1) = 0 mod delta
    for (const Int &c3 : detail::solve_linear_congruence(in.alpha_star, 0, delta))
      for (const Int &c2 : detail::solve_linear_congruence(-2 * n * m, -x * c3, delta))
        for (const Int &c1 : detail::solve_linear_congruence(in.delta_star, 2 * n * in.mu * c2 - y * c3, delta)) {
          RightCosetForm5 f{alpha, delta, in, {c1, c2, c3}};
          auto mat = f.try_assemble(level);
          if (!mat || !detail::scaled_inverse_integral(level, *mat))
            continue;
          if (smith_invariants(*mat) != label.invariants)
            continue;
          found[h].push_back(std::move(f));
        }
  });

  RightCosetTable table{label, {}, {}};
  for (auto &v : found)
    for (auto &f : v) {
      IntMat mat = f.assemble(level);
      if (!is_orthogonal_similitude(mat, m, form))
        throw InvariantError("enumerated matrix is not an orthogonal similitude");
      table.reps.push_back(OrthoElement::trusted(level, 5, std::move(mat), m));
      table.forms.push_back(std::move(f));
    }
  return table;
}

class HeckeContext {
public:
  explicit HeckeContext(Level level, Int bound = 0, unsigned jobs = 1, std::shared_ptr<TableStore> store = nullptr)
      : level_(level), bound_(std::move(bound)), jobs_(std::max(1u, jobs)), store_(std::move(store)) {}

  const Level &level() const { return level_; }
  unsigned jobs() const { return jobs_; }
  const Int &bound() const { return bound_; }

  void check_bound(const OrthoDoubleCosetLabel &label) const {
    const bool ok = bound_ > 0 ? label.m <= bound_ : within_default_bound(label.m);
    if (!ok) {
      std::string limit = bound_ > 0 ? "m <= " + bound_.str() : "p^2 per prime p <= 3, p per prime p >= 5";
      throw BoundError("denominator " + label.m.str() + " of " + label.str() + " exceeds the enumeration bound (" +
                       limit + ")");
    }
  }

  const RightCosetTable &table(const OrthoDoubleCosetLabel &label) {
    {
      std::lock_guard lock(mutex_);
      auto it = tables_.find(label);
      if (it != tables_.end())
        return *it->second;
    }
    check_bound(label);
    std::optional<RightCosetTable> t;
    if (store_)
      t = store_->load(level_, label);
    if (!t) {
      t = enumerate_right_cosets_raw(level_, label, jobs_);
      if (store_)
        store_->store(level_, *t);
    }
    std::lock_guard lock(mutex_);
    auto [it, inserted] = tables_.emplace(label, std::make_unique<RightCosetTable>(std::move(*t)));
    return *it->second;
  }

  // Product of two basis elements; memoized.
  std::optional<HeckeElement> cached_product(const OrthoDoubleCosetLabel &a, const OrthoDoubleCosetLabel &b) {
    std::lock_guard lock(mutex_);
    auto it = products_.find({a, b});
    if (it == products_.end())
      return std::nullopt;
    return it->second;
  }
  void remember_product(const OrthoDoubleCosetLabel &a, const OrthoDoubleCosetLabel &b, const HeckeElement &x) {
    std::lock_guard lock(mutex_);
    products_.emplace(std::make_pair(a, b), x);
  }

  // Right-coset counts learned as a by-product of multiplication.
  void remember_degree(const OrthoDoubleCosetLabel &label, const Int &deg) {
    std::lock_guard lock(mutex_);
    auto [it, inserted] = degrees_.emplace(label, deg);
    if (!inserted && it->second != deg)
      throw InvariantError("inconsistent right coset count for " + label.str());
  }
  std::optional<Int> known_degree(const OrthoDoubleCosetLabel &label) {
    std::lock_guard lock(mutex_);
    if (auto it = tables_.find(label); it != tables_.end())
      return Int(it->second->size());
    if (auto it = degrees_.find(label); it != degrees_.end())
      return it->second;
    return std::nullopt;
  }

private:
  Level level_;
  Int bound_;
  unsigned jobs_;
  std::shared_ptr<TableStore> store_;
  std::mutex mutex_;
  std::map<OrthoDoubleCosetLabel, std::unique_ptr<RightCosetTable>> tables_;
  std::map<std::pair<OrthoDoubleCosetLabel, OrthoDoubleCosetLabel>, HeckeElement> products_;
  std::map<OrthoDoubleCosetLabel, Int> degrees_;
};

inline const RightCosetTable &enumerate_right_cosets(HeckeContext &ctx, const OrthoDoubleCosetLabel &label) {
  return ctx.table(label);
}

namespace detail {

struct ProductTally {
  Int landed = 0;        // pairs (i, j) with a_i b_j in the double coset
  Int distinguished = 0; // pairs with Gamma a_i b_j = Gamma diag(label)
};

inline std::map<OrthoDoubleCosetLabel, ProductTally> tally_products(HeckeContext &ctx, const RightCosetTable &a,
                                                                    const RightCosetTable &b) {
  std::vector<std::map<OrthoDoubleCosetLabel, ProductTally>> partial(a.size());
  std::mutex form_mutex;
  std::map<OrthoDoubleCosetLabel, RightCosetForm> dist_forms;
  auto distinguished_form = [&](const OrthoDoubleCosetLabel &l) {
    std::lock_guard lock(form_mutex);
    auto it = dist_forms.find(l);
    if (it == dist_forms.end())
      it = dist_forms.emplace(l, right_coset_canonical(l.representative(ctx.level()))).first;
    return it->second;
  };
  parallel_for(a.size(), ctx.jobs(), [&](std::size_t i) {
    for (const auto &bj : b.reps) {
      const OrthoElement prod = a.reps[i] * bj;
      const OrthoDoubleCosetLabel l = double_coset_canonical(prod);
      auto &t = partial[i][l];
      ++t.landed;
      if (right_coset_canonical(prod) == distinguished_form(l))
        ++t.distinguished;
    }
  });
  std::map<OrthoDoubleCosetLabel, ProductTally> total;
  for (const auto &p : partial)
    for (const auto &[l, t] : p) {
      total[l].landed += t.landed;
      total[l].distinguished += t.distinguished;
    }
  return total;
}

} // namespace detail

// D * E for basis elements: the coefficient of F counts the pairs of right
// coset representatives whose product lies in the right coset of diag(F).
inline HeckeElement multiply_labels(HeckeContext &ctx, const OrthoDoubleCosetLabel &d, const OrthoDoubleCosetLabel &e) {
  if (auto c = ctx.cached_product(d, e))
    return *c;
  const auto &a = ctx.table(d);
  const auto &b = ctx.table(e);
  HeckeElement out;
  for (const auto &[l, t] : detail::tally_products(ctx, a, b)) {
    if (t.distinguished == 0 || t.landed % t.distinguished != 0)
      throw InvariantError("inconsistent structure constant for " + l.str() + " in " + d.str() + " * " + e.str());
    ctx.remember_degree(l, t.landed / t.distinguished);
    out.add(l, t.distinguished);
  }
  ctx.remember_product(d, e, out);
  return out;
}

inline HeckeElement multiply(HeckeContext &ctx, const HeckeElement &x, const HeckeElement &y) {
  HeckeElement out;
  for (const auto &[d, cd] : x.terms())
    for (const auto &[e, ce] : y.terms())
      out += (cd * ce) * multiply_labels(ctx, d, e);
  return out;
}

// Same product via the classical formula: pairs landing in F divided by the
// number of right cosets in F. Needs every F within the enumeration bound.
inline HeckeElement multiply_by_degree(HeckeContext &ctx, const HeckeElement &x, const HeckeElement &y) {
  HeckeElement out;
  for (const auto &[d, cd] : x.terms())
    for (const auto &[e, ce] : y.terms())
      for (const auto &[l, t] : detail::tally_products(ctx, ctx.table(d), ctx.table(e))) {
        const Int deg = ctx.table(l).size();
        if (t.landed % deg != 0)
          throw InvariantError("non-integral structure constant for " + l.str());
        out.add(l, cd * ce * (t.landed / deg));
      }
  return out;
}

// Number of right cosets in an element, counted with multiplicity.
inline Int degree(HeckeContext &ctx, const HeckeElement &x) {
  Int s = 0;
  for (const auto &[l, c] : x.terms()) {
    auto d = ctx.known_degree(l);
    s += c * (d ? *d : Int(ctx.table(l).size()));
  }
  return s;
}

inline bool verify_commutativity(HeckeContext &ctx, const HeckeElement &a, const HeckeElement &b) {
  return multiply(ctx, a, b) == multiply(ctx, b, a);
}

// Labels (p^a, p^b, p^r, p^(2r-b), p^(2r-a)) / p^r with a <= b <= r, i.e. the
// double cosets whose denominator divides p^r, written over p^r.
inline std::vector<std::vector<Int>> chain_labels(const Int &p, unsigned r) {
  std::vector<std::vector<Int>> out;
  for (unsigned a = 0; a <= r; ++a)
    for (unsigned b = a; b <= r; ++b)
      out.push_back({ipow(p, a), ipow(p, b), ipow(p, r), ipow(p, 2 * r - b), ipow(p, 2 * r - a)});
  return out;
}

// Double cosets of similitudes with denominator dividing p^r: every diagonal
// (1/p^r) diag(p^e0, ..., p^e4) in SO_0(S^_N) is built, validated and
// classified by its Smith invariants.
inline std::set<OrthoDoubleCosetLabel> census_labels(const Level &level, const Int &p, unsigned r) {
  if (!is_prime(p))
    throw ArithmeticError("p must be prime");
  const QuadForm s5 = build_form(level, 5);
  const Int m = ipow(p, r);
  std::set<OrthoDoubleCosetLabel> out;
  for (unsigned e0 = 0; e0 <= 2 * r; ++e0)
    for (unsigned e1 = 0; e1 <= 2 * r; ++e1) {
      const IntMat d = IntMat::diagonal({ipow(p, e0), ipow(p, e1), m, ipow(p, 2 * r - e1), ipow(p, 2 * r - e0)});
      out.insert(double_coset_canonical(OrthoElement::make(s5, d, m)));
    }
  return out;
}

inline Int count_double_cosets(const Level &level, const Int &p, unsigned r) {
  return Int(census_labels(level, p, r).size());
}

// Reduced labels with denominator exactly p^k.
inline std::vector<OrthoDoubleCosetLabel> labels_of_degree(const Int &p, unsigned k) {
  std::vector<OrthoDoubleCosetLabel> out;
  for (unsigned s = 0; s <= k; ++s)
    out.push_back(make_label({1, ipow(p, s), ipow(p, k), ipow(p, 2 * k - s), ipow(p, 2 * k)}));
  return out;
}

// (k, s) with m = p^k and alpha* = p^s for a reduced label in the p-primary part.
inline std::pair<unsigned, unsigned> primary_degree(const OrthoDoubleCosetLabel &l, const Int &p) {
  auto exponent = [&](Int x) {
    unsigned e = 0;
    while (x % p == 0) {
      x /= p;
      ++e;
    }
    if (x != 1)
      throw ArithmeticError("label " + l.str() + " is not in the primary component of p = " + p.str());
    return e;
  };
  return {exponent(l.m), exponent(l.invariants[1])};
}

// Integer polynomial in T1 = T_{N,1}(p), T2 = T_{N,2}(p): (u, v) -> coefficient of T1^u T2^v.
using GeneratorPolynomial = std::map<std::pair<unsigned, unsigned>, Int>;

class GeneratorPowers {
public:
  GeneratorPowers(HeckeContext &ctx, Int p) : ctx_(ctx), p_(std::move(p)) {}

  const HeckeElement &monomial(unsigned u, unsigned v) {
    auto it = cache_.find({u, v});
    if (it != cache_.end())
      return it->second;
    HeckeElement x;
    if (u == 0 && v == 0)
      x = HeckeElement::unit();
    else if (u > 0)
      x = multiply(ctx_, monomial(u - 1, v), HeckeElement(label_t1(p_)));
    else
      x = multiply(ctx_, monomial(0, v - 1), HeckeElement(label_t2(p_)));
    return cache_.emplace(std::make_pair(u, v), std::move(x)).first->second;
  }

  HeckeElement evaluate(const GeneratorPolynomial &poly) {
    HeckeElement out;
    for (const auto &[uv, c] : poly)
      out += c * monomial(uv.first, uv.second);
    return out;
  }

private:
  HeckeContext &ctx_;
  Int p_;
  std::map<std::pair<unsigned, unsigned>, HeckeElement> cache_;
};

// Triangular elimination: the highest-degree label with the smallest alpha*
// exponent s is the leading term of T1^s T2^(k-s), with coefficient 1.
inline GeneratorPolynomial express_in_generators(HeckeContext &ctx, HeckeElement x, const Int &p) {
  if (!is_prime(p))
    throw ArithmeticError("p must be prime");
  GeneratorPowers powers(ctx, p);
  GeneratorPolynomial poly;
  while (!x.is_zero()) {
    const OrthoDoubleCosetLabel *lead = nullptr;
    std::pair<unsigned, unsigned> best{0, 0};
    for (const auto &[l, c] : x.terms()) {
      auto ks = primary_degree(l, p);
      if (!lead || ks.first > best.first || (ks.first == best.first && ks.second < best.second)) {
        lead = &l;
        best = ks;
      }
    }
    const auto [k, s] = best;
    const Int c = x.coeff(*lead);
    const HeckeElement &mono = powers.monomial(s, k - s);
    if (mono.coeff(*lead) != 1)
      throw InvariantError("leading coefficient of T1^" + std::to_string(s) + " T2^" + std::to_string(k - s) +
                           " is not 1");
    for (const auto &[l, cl] : mono.terms()) {
      auto ks = primary_degree(l, p);
      if (ks.first > k || (ks.first == k && ks.second < s))
        throw InvariantError("monomial T1^" + std::to_string(s) + " T2^" + std::to_string(k - s) +
                             " is not triangular at " + l.str());
    }
    x -= c * mono;
    poly[{s, k - s}] += c;
  }
  std::erase_if(poly, [](const auto &kv) { return kv.second == 0; });
  return poly;
}

inline HeckeElement evaluate_polynomial(HeckeContext &ctx, const GeneratorPolynomial &poly, const Int &p) {
  GeneratorPowers powers(ctx, p);
  return powers.evaluate(poly);
}

inline std::string polynomial_str(const GeneratorPolynomial &poly) {
  if (poly.empty())
    return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto &[uv, c] : poly) {
    const Int a = abs_int(c);
    os << (first ? (c < 0 ? "-" : "") : (c < 0 ? " - " : " + "));
    std::string mono;
    if (uv.first)
      mono += "T1" + (uv.first > 1 ? "^" + std::to_string(uv.first) : "");
    if (uv.second)
      mono += (mono.empty() ? "" : "*") + ("T2" + (uv.second > 1 ? "^" + std::to_string(uv.second) : ""));
    if (mono.empty())
      os << a;
    else if (a == 1)
      os << mono;
    else
      os << a << "*" << mono;
    first = false;
  }
  return os.str();
}

} // namespace hecke
