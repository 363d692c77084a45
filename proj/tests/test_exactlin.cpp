#include "hecke/exactlin.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace hecke;

namespace {

std::vector<Int> ints(std::initializer_list<int> v) { return {v.begin(), v.end()}; }

void expect_valid_smith(const IntMat &a, const SmithData &s) {
  const std::size_t k = std::min(a.rows(), a.cols());
  ASSERT_EQ(s.invariants.size(), k);
  IntMat d(a.rows(), a.cols());
  for (std::size_t i = 0; i < k; ++i)
    d(i, i) = s.invariants[i];
  EXPECT_EQ(s.left_transform * a * s.right_transform, d);
  EXPECT_EQ(abs_int(det(s.left_transform)), 1);
  EXPECT_EQ(abs_int(det(s.right_transform)), 1);
  for (std::size_t i = 0; i + 1 < k; ++i)
    EXPECT_TRUE(divides(s.invariants[i], s.invariants[i + 1]));
  for (const auto &x : s.invariants)
    EXPECT_GE(x, 0);
}

} // namespace

TEST(SmithNormalForm, DiagonalChainIsFixed) {
  for (int p : {2, 3, 5}) {
    const IntMat a = IntMat::diagonal({Int(1), Int(p), Int(p * p)});
    EXPECT_EQ(smith_invariants(a), ints({1, p, p * p}));
  }
}

TEST(SmithNormalForm, TwoByTwoExample) {
  // gcd of entries is 2, |det| = 8, so the invariants are (2, 4).
  const IntMat a{{2, 4}, {6, 8}};
  auto s = smith_normal_form(a);
  EXPECT_EQ(s.invariants, ints({2, 4}));
  expect_valid_smith(a, s);
}

TEST(SmithNormalForm, Identity) {
  EXPECT_EQ(smith_invariants(IntMat::identity(5)), ints({1, 1, 1, 1, 1}));
}

TEST(SmithNormalForm, ZeroAndSingularInputs) {
  EXPECT_EQ(smith_invariants(IntMat(3, 3)), ints({0, 0, 0}));
  const IntMat a{{1, 2, 3}, {2, 4, 6}, {0, 0, 5}};
  auto s = smith_normal_form(a);
  EXPECT_EQ(s.invariants, ints({1, 5, 0}));
  EXPECT_EQ(s.invariants, oracle::smith_by_minors(a));
  expect_valid_smith(a, s);
}

TEST(SmithNormalForm, RandomMatricesAgreeWithMinorOracle) {
  std::mt19937_64 rng(20180312);
  for (int trial = 0; trial < 150; ++trial) {
    const std::size_t rows = 2 + trial % 4, cols = 2 + (trial / 4) % 4;
    const IntMat a = oracle::random_matrix(rng, rows, cols, -9, 9);
    auto s = smith_normal_form(a);
    expect_valid_smith(a, s);
    EXPECT_EQ(s.invariants, oracle::smith_by_minors(a)) << a;
  }
}

TEST(SmithNormalForm, MultiplicativeForCoprimeDeterminants) {
  std::mt19937_64 rng(7);
  int checked = 0;
  while (checked < 40) {
    const IntMat a = oracle::random_matrix(rng, 4, 4, -4, 4);
    const IntMat b = oracle::random_matrix(rng, 4, 4, -4, 4);
    const Int da = det(a), db = det(b);
    if (da == 0 || db == 0 || gcd(da, db) != 1)
      continue;
    ++checked;
    const auto sa = smith_invariants(a), sb = smith_invariants(b);
    std::vector<Int> prod(4);
    for (int i = 0; i < 4; ++i)
      prod[i] = sa[i] * sb[i];
    EXPECT_EQ(smith_invariants(a * b), prod);

    IntMat blk(8, 8);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        blk(i, j) = a(i, j);
        blk(4 + i, 4 + j) = b(i, j);
      }
    // Coprime blocks: the invariants of the sum are 1,1,1,1 followed by the
    // products, since each prime lives in only one block.
    std::vector<Int> expected{1, 1, 1, 1};
    expected.insert(expected.end(), prod.begin(), prod.end());
    EXPECT_EQ(smith_invariants(blk), expected);
  }
}

TEST(RankModP, Examples) {
  for (int p : {2, 3, 5}) {
    const IntMat a = IntMat::diagonal({Int(1), Int(p), Int(p), Int(p), Int(p * p)});
    EXPECT_EQ(rank_mod_p(a, p), 1u);
    EXPECT_EQ(rank_mod_p(IntMat::identity(4), p), 4u);
  }
  EXPECT_EQ(rank_mod_p(IntMat{{2, 4}, {6, 8}}, 2), 0u);
}

TEST(RankModP, RejectsComposite) {
  EXPECT_THROW(rank_mod_p(IntMat::identity(2), 4), ArithmeticError);
  EXPECT_THROW(rank_mod_p(IntMat::identity(2), 1), ArithmeticError);
}

TEST(RankModP, CountsInvariantsPrimeToP) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const IntMat a = oracle::random_matrix(rng, 5, 5, -6, 6);
    const auto inv = smith_invariants(a);
    for (int p : {2, 3, 5, 7}) {
      std::size_t expected = 0;
      for (const auto &d : inv)
        if (d % p != 0)
          ++expected;
      EXPECT_EQ(rank_mod_p(a, p), expected);
    }
  }
}

TEST(Determinant, AgreesWithLaplace) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 60; ++trial) {
    const IntMat a = oracle::random_matrix(rng, 1 + trial % 5, 1 + trial % 5, -7, 7);
    EXPECT_EQ(det(a), oracle::laplace_det(a));
  }
}

TEST(InverseScaled, Examples) {
  auto [b1, s1] = inverse_scaled(IntMat::identity(3));
  EXPECT_EQ(b1, IntMat::identity(3));
  EXPECT_EQ(s1, 1);

  auto [b2, s2] = inverse_scaled(IntMat::diagonal({Int(1), Int(2), Int(4)}));
  EXPECT_EQ(b2, IntMat::diagonal({Int(8), Int(4), Int(2)}));
  EXPECT_EQ(s2, 8);

  const IntMat a{{3, 5}, {7, 11}};
  auto [b3, s3] = inverse_scaled(a);
  EXPECT_EQ(b3, (IntMat{{11, -5}, {-7, 3}}));
  EXPECT_EQ(s3, 3 * 11 - 5 * 7);
}

TEST(InverseScaled, ProductIsScaledIdentity) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const IntMat a = oracle::random_matrix(rng, 5, 5, -5, 5);
    if (det(a) == 0)
      continue;
    auto [b, s] = inverse_scaled(a);
    EXPECT_EQ(a * b, s * IntMat::identity(5));
  }
}

TEST(InverseScaled, SingularThrows) {
  EXPECT_THROW(inverse_scaled(IntMat{{1, 2}, {2, 4}}), ArithmeticError);
}

TEST(NumberTheory, Helpers) {
  EXPECT_TRUE(is_squarefree(1));
  EXPECT_TRUE(is_squarefree(30));
  EXPECT_FALSE(is_squarefree(4));
  EXPECT_FALSE(is_squarefree(18));
  EXPECT_EQ(divisors(12), ints({1, 2, 3, 4, 6, 12}));
  EXPECT_EQ(prime_power(27), (std::pair<Int, unsigned>{3, 3}));
  EXPECT_EQ(prime_power(12).second, 0u);
  auto [g, x, y] = ext_gcd(240, 46);
  EXPECT_EQ(g, 2);
  EXPECT_EQ(240 * x + 46 * y, 2);
  EXPECT_EQ(floor_div(-7, 3), -3);
  EXPECT_EQ(mod_floor(-7, 3), 2);
}

TEST(GaussRat, FieldOperations) {
  const GaussRat a(Rat(1, 2), Rat(3));
  const GaussRat b(Rat(-2), Rat(1, 3));
  EXPECT_EQ((a * b) / b, a);
  EXPECT_EQ(a - a, GaussRat(0));
  EXPECT_EQ(GaussRat::i() * GaussRat::i(), GaussRat(-1));
  EXPECT_THROW(a / GaussRat(0), ArithmeticError);
}
