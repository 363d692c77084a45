#include "hecke/hecke.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace hecke;

namespace {

Int t1_count(const Level &level, const Int &p) {
  return level.divisible_by(p) ? Int(p + 2 * p * p + p * p * p) : Int(1 + p + p * p + p * p * p);
}

Int t2_count(const Level &level, const Int &p) {
  const Int p3 = p * p * p;
  return level.divisible_by(p) ? Int(2 * p3 + 2 * p3 * p) : Int(p + p * p + p3 + p3 * p);
}

// Canonical right cosets reached by sampling Gamma g gamma for random gamma.
std::set<std::string> sampled_right_cosets(const Level &level, const OrthoDoubleCosetLabel &label, int samples) {
  const QuadForm s5 = build_form(level, 5);
  std::set<std::string> seen;
  std::mt19937_64 rng(77);
  for (int i = 0; i < samples; ++i) {
    const OrthoElement e =
        random_group_element(s5, rng(), 3) * label.representative(level) * random_group_element(s5, rng(), 12);
    seen.insert(canonical_right_rep(e).mat().str());
  }
  return seen;
}

} // namespace

TEST(Enumeration, UnitHasOneCoset) {
  HeckeContext ctx{Level(6)};
  const auto &t = ctx.table(unit_label());
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t.reps[0], OrthoElement::identity(build_form(Level(6), 5)));
}

TEST(Enumeration, CountFormulas) {
  for (std::int64_t n : {1, 2, 3, 5, 6}) {
    HeckeContext ctx{Level(n)};
    for (int p : {2, 3}) {
      EXPECT_EQ(ctx.table(label_t1(p)).size(), t1_count(ctx.level(), p)) << "N=" << n << " p=" << p;
      EXPECT_EQ(ctx.table(label_t2(p)).size(), t2_count(ctx.level(), p)) << "N=" << n << " p=" << p;
    }
  }
}

TEST(Enumeration, TableInvariants) {
  for (std::int64_t n : {1, 2}) {
    const Level level(n);
    const QuadForm s5 = build_form(level, 5);
    HeckeContext ctx(level);
    for (const auto &label : {label_t1(2), label_t2(2)}) {
      const auto &t = ctx.table(label);
      for (std::size_t i = 0; i < t.size(); ++i) {
        EXPECT_NO_THROW(OrthoElement::make(s5, t.reps[i].mat(), t.reps[i].denom()));
        EXPECT_EQ(double_coset_canonical(t.reps[i]), label);
        EXPECT_EQ(right_coset_canonical(t.reps[i]), RightCosetForm(t.forms[i]));
        for (std::size_t j = 0; j < i; ++j)
          EXPECT_FALSE((t.reps[i] * t.reps[j].inverse()).is_integral());
      }
    }
  }
}

TEST(Enumeration, AgreesWithSampledCosets) {
  for (std::int64_t n : {1, 2}) {
    const Level level(n);
    HeckeContext ctx(level);
    for (const auto &label : {label_t1(2), label_t2(2)}) {
      std::set<std::string> table;
      for (const auto &r : ctx.table(label).reps)
        table.insert(r.mat().str());
      EXPECT_EQ(sampled_right_cosets(level, label, 4000), table) << label.str();
    }
  }
}

TEST(Enumeration, ParallelMatchesSerial) {
  const Level level(3);
  const auto a = enumerate_right_cosets_raw(level, label_t2(3), 1);
  const auto b = enumerate_right_cosets_raw(level, label_t2(3), 4);
  EXPECT_EQ(a.forms, b.forms);
}

TEST(Enumeration, BoundEnforced) {
  HeckeContext ctx{Level(1)};
  EXPECT_THROW(ctx.table(make_label({1, 2, 8, 32, 64})), BoundError);
  EXPECT_THROW(ctx.table(label_t1(25)), BoundError);
  HeckeContext wide{Level(1), 8};
  EXPECT_NO_THROW(wide.table(make_label({1, 1, 8, 64, 64})));
}

TEST(Multiply, UnitIsNeutral) {
  HeckeContext ctx{Level(2)};
  const HeckeElement t1(label_t1(2));
  EXPECT_EQ(multiply(ctx, HeckeElement::unit(), t1), t1);
  EXPECT_EQ(multiply(ctx, t1, HeckeElement::unit()), t1);
}

TEST(Multiply, CoprimeDenominatorsGiveSingleCoset) {
  HeckeContext ctx{Level(1)};
  const HeckeElement x = multiply(ctx, HeckeElement(label_t1(2)), HeckeElement(label_t1(3)));
  EXPECT_EQ(x, HeckeElement(make_label({1, 6, 6, 6, 36})));
}

TEST(Multiply, AgreesWithDegreeFormula) {
  for (std::int64_t n : {1, 2}) {
    HeckeContext ctx{Level(n)};
    const HeckeElement t1(label_t1(2)), t2(label_t2(2));
    for (const auto &[a, b] : {std::pair{t1, t2}, std::pair{t2, t1}, std::pair{t1, t1}, std::pair{t2, t2}}) {
      const HeckeElement fast = multiply(ctx, a, b);
      EXPECT_EQ(fast, multiply_by_degree(ctx, a, b));
      EXPECT_EQ(degree(ctx, fast), degree(ctx, a) * degree(ctx, b));
    }
  }
}

TEST(Multiply, T1T2ExpansionAtLevelOne) {
  // Coefficients frozen from the degree-formula route above.
  HeckeContext ctx{Level(1)};
  const HeckeElement x = multiply(ctx, HeckeElement(label_t1(2)), HeckeElement(label_t2(2)));
  EXPECT_EQ(x.coeff(make_label({1, 2, 4, 8, 16})), 1);
  for (const auto &[l, c] : x.terms()) {
    EXPECT_GT(c, 0);
    EXPECT_LE(primary_degree(l, 2).first, 2u);
  }
}

TEST(Multiply, Commutativity) {
  for (std::int64_t n : {1, 2}) {
    HeckeContext ctx{Level(n)};
    const HeckeElement t1(label_t1(2)), t2(label_t2(2));
    EXPECT_TRUE(verify_commutativity(ctx, t1, t2));
    EXPECT_TRUE(verify_commutativity(ctx, t1, t1));
  }
}

TEST(Census, BinomialCount) {
  const std::vector<Int> expected{1, 3, 6, 10};
  for (std::int64_t n : {1, 2, 3, 5, 6})
    for (int p : {2, 3})
      for (unsigned r = 0; r <= 3; ++r) {
        EXPECT_EQ(count_double_cosets(Level(n), p, r), expected[r]) << "N=" << n << " p=" << p << " r=" << r;
        std::size_t reduced = 0;
        for (unsigned k = 0; k <= r; ++k)
          reduced += labels_of_degree(p, k).size();
        EXPECT_EQ(Int(reduced), expected[r]);
      }
}

TEST(Census, MatchesChainLabels) {
  for (std::int64_t n : {1, 6})
    for (int p : {2, 3})
      for (unsigned r = 0; r <= 3; ++r) {
        std::set<OrthoDoubleCosetLabel> chains;
        for (const auto &c : chain_labels(p, r))
          chains.insert(double_coset_canonical(make_label(c).representative(Level(n))));
        EXPECT_EQ(census_labels(Level(n), p, r), chains);
      }
}

TEST(Census, ProductsStayInsideTheCensus) {
  const Level level(2);
  HeckeContext ctx{level};
  const auto census = census_labels(level, 2, 2);
  const auto &a = ctx.table(label_t1(2)), &b = ctx.table(label_t2(2));
  for (const auto &x : a.reps)
    for (const auto &y : b.reps)
      EXPECT_TRUE(census.count(double_coset_canonical(x * y)));
}

TEST(Generation, Monomials) {
  HeckeContext ctx{Level(1)};
  EXPECT_EQ(express_in_generators(ctx, HeckeElement(label_t1(2)), 2), (GeneratorPolynomial{{{1, 0}, 1}}));
  EXPECT_EQ(express_in_generators(ctx, HeckeElement(label_t2(2)), 2), (GeneratorPolynomial{{{0, 1}, 1}}));
  EXPECT_EQ(express_in_generators(ctx, HeckeElement::unit(), 2), (GeneratorPolynomial{{{0, 0}, 1}}));
}

TEST(Generation, LeadingTermsAreTriangular) {
  HeckeContext ctx{Level(1)};
  GeneratorPowers powers(ctx, 2);
  for (unsigned u = 0; u <= 2; ++u)
    for (unsigned v = 0; u + v <= 2; ++v) {
      const auto &x = powers.monomial(u, v);
      EXPECT_EQ(x.coeff(make_label({1, ipow(2, u), ipow(2, u + v), ipow(2, u + 2 * v), ipow(2, 2 * (u + v))})), 1);
      for (const auto &[l, c] : x.terms()) {
        auto [k, s] = primary_degree(l, 2);
        EXPECT_LE(k, u + v);
        if (k == u + v)
          EXPECT_GE(s, u);
      }
    }
}

TEST(Generation, DegreeTwoLabelsRoundTrip) {
  for (std::int64_t n : {1, 2}) {
    HeckeContext ctx{Level(n)};
    for (const auto &l : labels_of_degree(2, 2)) {
      const HeckeElement x(l);
      const auto poly = express_in_generators(ctx, x, 2);
      EXPECT_EQ(evaluate_polynomial(ctx, poly, 2), x) << l.str() << " = " << polynomial_str(poly);
    }
  }
}

TEST(Generation, LevelOneExpressions) {
  // Same relations as for the full Siegel modular group at p = 2.
  HeckeContext ctx{Level(1)};
  EXPECT_EQ(polynomial_str(express_in_generators(ctx, HeckeElement(make_label({1, 1, 4, 16, 16})), 2)),
            "15 + 8*T2 + T2^2 - 3*T1^2");
  EXPECT_EQ(polynomial_str(express_in_generators(ctx, HeckeElement(make_label({1, 2, 4, 8, 16})), 2)),
            "-6*T1 + T1*T2");
  EXPECT_EQ(polynomial_str(express_in_generators(ctx, HeckeElement(make_label({1, 4, 4, 4, 16})), 2)),
            "-15 - 3*T2 + T1^2");
}

TEST(Generation, RejectsOtherPrimes) {
  HeckeContext ctx{Level(1)};
  EXPECT_THROW(express_in_generators(ctx, HeckeElement(label_t1(3)), 2), ArithmeticError);
}

TEST(Algebra, NoZeroDivisorsAmongSmallPolynomials) {
  HeckeContext ctx{Level(1)};
  GeneratorPowers powers(ctx, 2);
  const HeckeElement one = HeckeElement::unit(), t1 = powers.monomial(1, 0), t2 = powers.monomial(0, 1);
  const std::vector<HeckeElement> lin{t1 - t2, t1 + t2, t1 - one, t2 - Int(3) * one};
  const std::vector<HeckeElement> quad{powers.monomial(2, 0) - t2, powers.monomial(1, 1) - t1};
  for (const auto &a : lin)
    for (const auto &b : lin)
      EXPECT_FALSE(multiply(ctx, a, b).is_zero());
  for (const auto &a : lin)
    for (const auto &b : quad)
      EXPECT_FALSE(multiply(ctx, a, b).is_zero());
}
