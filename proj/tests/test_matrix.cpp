#include <gtest/gtest.h>

#include <map>

#include "conjauth/error.hpp"
#include "conjauth/key.hpp"
#include "oracle.hpp"

using namespace conjauth;

namespace {

RingPtr ring_of(std::uint32_t p, std::uint32_t k, std::uint32_t N) { return Ring::create(RingParams::make(p, k, N)); }

TruncatedPoly c(const RingPtr& r, std::uint32_t v) { return TruncatedPoly::constant(r, v); }
TruncatedPoly x(const RingPtr& r, std::uint32_t var, std::uint32_t coeff = 1) {
  return TruncatedPoly::variable(r, var, coeff);
}

MatrixR elementary(const RingPtr& r, std::uint32_t n, std::uint32_t i, std::uint32_t j, const TruncatedPoly& u) {
  MatrixR e = MatrixR::identity(r, n);
  e.at(i, j) = u;
  return e;
}

}  // namespace

TEST(MatrixR, FromEntriesChecksShape) {
  auto r = ring_of(11, 2, 5);
  EXPECT_THROW(MatrixR::from_entries(r, 2, {c(r, 1)}), DimensionMismatch);
  auto other = ring_of(11, 2, 6);
  EXPECT_THROW(MatrixR::from_entries(r, 1, {c(other, 1)}), ParameterMismatch);
}

TEST(MatMul, IdentityAndPowers) {
  auto r = ring_of(11, 3, 8);
  Rng rng(1);
  const MatrixR a = random_matrix(r, 3, 4, true, rng);
  EXPECT_EQ(mat_mul(a, MatrixR::identity(r, 3)), a);
  EXPECT_EQ(mat_pow(a, 1), a);
  EXPECT_EQ(mat_pow(a, 3), mat_mul(a, mat_mul(a, a)));
  EXPECT_THROW(mat_mul(a, MatrixR::identity(r, 2)), DimensionMismatch);
}

TEST(MatMul, ElementaryProduct) {
  auto r = ring_of(11, 2, 6);
  const TruncatedPoly u = x(r, 0, 2) + c(r, 3);
  const TruncatedPoly v = x(r, 1, 5);
  const MatrixR prod = mat_mul(elementary(r, 3, 0, 1, u), elementary(r, 3, 1, 2, v));
  MatrixR expect = MatrixR::identity(r, 3);
  expect.at(0, 1) = u;
  expect.at(1, 2) = v;
  expect.at(0, 2) = poly_mul(u, v);
  EXPECT_EQ(prod, expect);
}

TEST(MatMul, MatchesOracle) {
  auto r = ring_of(11, 3, 9);
  Rng rng(2);
  for (int i = 0; i < 30; ++i) {
    const MatrixR a = random_matrix(r, 3, 5, true, rng);
    const MatrixR b = random_matrix(r, 3, 5, true, rng);
    ASSERT_EQ(mat_mul(a, b), oracle::to(r, oracle::mul(oracle::from(a), oracle::from(b))));
  }
}

TEST(MatrixAxioms, RandomTriples) {
  auto r = ring_of(11, 2, 7);
  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    const MatrixR a = random_matrix(r, 3, 3, true, rng);
    const MatrixR b = random_matrix(r, 3, 3, true, rng);
    const MatrixR cm = random_matrix(r, 3, 3, true, rng);
    ASSERT_EQ(mat_mul(mat_mul(a, b), cm), mat_mul(a, mat_mul(b, cm)));
    ASSERT_EQ(mat_mul(a, mat_add(b, cm)), mat_add(mat_mul(a, b), mat_mul(a, cm)));
    ASSERT_EQ(mat_mul(mat_add(a, b), cm), mat_add(mat_mul(a, cm), mat_mul(b, cm)));
  }
}

TEST(Trace, Examples) {
  auto r = ring_of(11, 2, 5);
  EXPECT_EQ(trace(MatrixR::identity(r, 3)), c(r, 3));
  EXPECT_EQ(trace(elementary(r, 3, 0, 1, x(r, 0))), c(r, 3));
  EXPECT_EQ(trace(MatrixR::identity(r, 12)), c(r, 1));
}

TEST(Trace, Linear) {
  auto r = ring_of(11, 3, 8);
  Rng rng(4);
  for (int i = 0; i < 100; ++i) {
    const MatrixR a = random_matrix(r, 3, 4, true, rng);
    const MatrixR b = random_matrix(r, 3, 4, true, rng);
    ASSERT_EQ(trace(mat_add(a, b)), poly_add(trace(a), trace(b)));
    ASSERT_EQ(trace_of_product(a, b), trace(mat_mul(a, b)));
  }
}

TEST(Determinant, Examples) {
  auto r = ring_of(11, 2, 5);
  EXPECT_EQ(determinant(MatrixR::identity(r, 3)), c(r, 1));
  EXPECT_EQ(determinant(elementary(r, 3, 2, 0, x(r, 1, 4))), c(r, 1));
  EXPECT_EQ(determinant(elementary(r, 4, 0, 3, x(r, 0))), c(r, 1));
  EXPECT_THROW(determinant(MatrixR::identity(r, 5)), UnsupportedDimension);
  // [[a, b], [c, d]] -> ad - bc.
  MatrixR m = MatrixR::from_entries(r, 2, {x(r, 0), c(r, 2), c(r, 3), x(r, 1)});
  EXPECT_EQ(determinant(m), poly_sub(poly_mul(x(r, 0), x(r, 1)), c(r, 6)));
}

TEST(Determinant, Multiplicative) {
  auto r = ring_of(11, 2, 7);
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    const MatrixR a = random_matrix(r, 3, 3, true, rng);
    const MatrixR b = random_matrix(r, 3, 3, true, rng);
    ASSERT_EQ(determinant(mat_mul(a, b)), poly_mul(determinant(a), determinant(b)));
  }
}

TEST(IsInvertible, Examples) {
  auto r = ring_of(11, 2, 5);
  EXPECT_TRUE(is_invertible(MatrixR::identity(r, 3)));
  Rng rng(6);
  MatrixR nil(r, 3);
  for (std::uint32_t i = 0; i < 3; ++i)
    for (std::uint32_t j = 0; j < 3; ++j) nil.at(i, j) = random_sparse_poly(r, 3, false, rng);
  EXPECT_FALSE(is_invertible(nil));
  MatrixR singular = MatrixR::from_entries(r, 2, {c(r, 1), c(r, 2), c(r, 2), c(r, 4)});
  EXPECT_FALSE(is_invertible(singular));
  EXPECT_EQ(is_invertible(singular), is_unit(determinant(singular)));
}

TEST(PrivateKey, ExpandedKeysAreInvertible) {
  auto r = ring_of(11, 3, 8);
  Rng rng(7);
  for (int i = 0; i < 100; ++i) {
    const FactoredInvertible key = gen_private_key(r, 3, static_cast<std::uint32_t>(rng.uniform(1, 12)), 3, rng);
    const MatrixR xm = key.expand();
    ASSERT_TRUE(is_invertible(xm));
    ASSERT_EQ(mat_mul(xm, key.expand_inverse()), MatrixR::identity(r, 3));
    ASSERT_EQ(xm, oracle::to(r, oracle::expand(key, false)));
    ASSERT_EQ(key.expand_inverse(), oracle::to(r, oracle::expand(key, true)));
    ASSERT_EQ(determinant(xm), c(r, 1));
  }
}

TEST(PrivateKey, FactorsUseDistinctIndices) {
  auto r = ring_of(11, 3, 8);
  Rng rng(8);
  const FactoredInvertible key = gen_private_key(r, 3, 500, 3, rng);
  std::map<std::pair<std::uint32_t, std::uint32_t>, int> seen;
  for (const auto& f : key.factors()) {
    ASSERT_NE(f.i, f.j);
    ASSERT_LT(f.i, 3U);
    ASSERT_LT(f.j, 3U);
    ASSERT_FALSE(f.u.is_zero());
    ++seen[{f.i, f.j}];
  }
  EXPECT_EQ(seen.size(), 6U);
}

TEST(PrivateKey, ValidationRejectsBadFactors) {
  auto r = ring_of(11, 2, 5);
  EXPECT_THROW(FactoredInvertible(r, 2, {}), InvalidParameter);
  EXPECT_THROW(FactoredInvertible(r, 2, {{0, 0, c(r, 1)}}), InvalidParameter);
  EXPECT_THROW(FactoredInvertible(r, 2, {{0, 2, c(r, 1)}}), InvalidParameter);
  EXPECT_THROW(FactoredInvertible(r, 2, {{0, 1, TruncatedPoly(r)}}), InvalidParameter);
}

TEST(PrivateKey, Deterministic) {
  auto r = ring_of(11, 3, 8);
  Rng a(9);
  Rng b(9);
  EXPECT_EQ(gen_private_key(r, 3, 30, 3, a), gen_private_key(r, 3, 30, 3, b));
}

TEST(Conjugate, HandExample) {
  // (I - x1 e12) [[1, 0], [2, 3]] (I + x1 e12) over Z_11, k = 1, N = 3.
  auto r = ring_of(11, 1, 3);
  const FactoredInvertible key(r, 2, {{0, 1, x(r, 0)}});
  const MatrixR a = MatrixR::from_entries(r, 2, {c(r, 1), c(r, 0), c(r, 2), c(r, 3)});
  const TruncatedPoly x2 = TruncatedPoly::monomial(r, std::vector<std::uint32_t>{2});
  const MatrixR expect = MatrixR::from_entries(
      r, 2, {c(r, 1) + x(r, 0, 9), x(r, 0, 9) + poly_scalar_mul(9, x2), c(r, 2), c(r, 3) + x(r, 0, 2)});
  EXPECT_EQ(conjugate(key, a), expect);
  EXPECT_EQ(conjugate(key, a), mat_mul(mat_mul(key.expand_inverse(), a), key.expand()));
}

TEST(Conjugate, CancellingKeyIsIdentity) {
  auto r = ring_of(11, 2, 6);
  const TruncatedPoly u = x(r, 0, 3) + c(r, 2);
  const FactoredInvertible key(r, 3, {{0, 2, u}, {0, 2, -u}});
  EXPECT_EQ(conjugate(key, MatrixR::identity(r, 3)), MatrixR::identity(r, 3));
  Rng rng(10);
  const MatrixR a = random_matrix(r, 3, 3, true, rng);
  EXPECT_EQ(conjugate(key, a), a);
}

TEST(Conjugate, MatchesDenseOracle) {
  auto r = ring_of(11, 2, 7);
  Rng rng(11);
  for (int i = 0; i < 100; ++i) {
    const FactoredInvertible key = gen_private_key(r, 3, static_cast<std::uint32_t>(rng.uniform(1, 10)), 3, rng);
    const MatrixR a = random_matrix(r, 3, 3, true, rng);
    const auto dense = oracle::mul(oracle::mul(oracle::expand(key, true), oracle::from(a)), oracle::expand(key, false));
    const MatrixR p = conjugate(key, a);
    ASSERT_EQ(p, oracle::to(r, dense));
    ASSERT_EQ(trace(p), trace(a));
    ASSERT_EQ(determinant(p), determinant(a));
  }
}

TEST(Word, ParseAndValidity) {
  EXPECT_EQ(Word::parse("xyx").to_string(), "xyx");
  EXPECT_THROW(Word::parse("xz"), InvalidParameter);
  EXPECT_FALSE(Word::parse("xx").is_valid());
  EXPECT_FALSE(Word::parse("y").is_valid());
  EXPECT_TRUE(Word::parse("yx").is_valid());
}

TEST(EvaluateWord, Examples) {
  auto r = ring_of(11, 2, 6);
  Rng rng(12);
  const MatrixR a = random_matrix(r, 2, 3, true, rng);
  const MatrixR b = random_matrix(r, 2, 3, true, rng);
  EXPECT_EQ(evaluate_word(Word::parse("xy"), a, b), mat_mul(a, b));
  EXPECT_EQ(evaluate_word(Word::parse("xyx"), MatrixR::identity(r, 2), b), b);
  EXPECT_EQ(evaluate_word_trace(Word::parse("yxxy"), a, b), trace(evaluate_word(Word::parse("yxxy"), a, b)));
}

TEST(EvaluateWord, ConjugationIdentity) {
  auto r = ring_of(11, 2, 7);
  Rng rng(13);
  for (int i = 0; i < 100; ++i) {
    const FactoredInvertible key = gen_private_key(r, 3, static_cast<std::uint32_t>(rng.uniform(1, 8)), 3, rng);
    const MatrixR a = random_matrix(r, 3, 3, true, rng);
    const MatrixR b = random_matrix(r, 3, 3, true, rng);
    const Word w = random_word(static_cast<std::uint32_t>(rng.uniform(2, 6)), rng);
    ASSERT_EQ(evaluate_word(w, conjugate(key, a), conjugate(key, b)), conjugate(key, evaluate_word(w, a, b)));
  }
}

TEST(EvaluateWord, DeterminantOfWord) {
  auto r = ring_of(11, 2, 6);
  Rng rng(14);
  for (int i = 0; i < 50; ++i) {
    const MatrixR a = random_matrix(r, 3, 3, true, rng);
    const MatrixR b = random_matrix(r, 3, 3, true, rng);
    const Word w = random_word(5, rng);
    const auto nx = static_cast<std::uint32_t>(w.count(Letter::X));
    const auto ny = static_cast<std::uint32_t>(w.count(Letter::Y));
    ASSERT_EQ(determinant(evaluate_word(w, a, b)),
              poly_mul(poly_pow(determinant(a), nx), poly_pow(determinant(b), ny)));
  }
}

TEST(RandomWord, LengthTwo) {
  Rng rng(15);
  int xy = 0;
  for (int i = 0; i < 2000; ++i) {
    const Word w = random_word(2, rng);
    ASSERT_TRUE(w.is_valid());
    if (w.to_string() == "xy") ++xy;
    else ASSERT_EQ(w.to_string(), "yx");
  }
  EXPECT_NEAR(xy, 1000, 150);
  EXPECT_THROW(random_word(1, rng), InvalidParameter);
}

TEST(RandomWord, PositionsBalanced) {
  Rng rng(16);
  const int draws = 10000;
  std::vector<int> ys(10, 0);
  for (int i = 0; i < draws; ++i) {
    const Word w = random_word(10, rng);
    ASSERT_TRUE(w.is_valid());
    for (std::size_t p = 0; p < 10; ++p) ys[p] += w.letters()[p] == Letter::Y;
  }
  // Chi-square over ten positions, each a fair coin; 29.6 is the 0.999
  // quantile at 10 degrees of freedom.
  double chi2 = 0;
  for (int y : ys) {
    const double dev = y - draws / 2.0;
    chi2 += 2 * dev * dev / (draws / 2.0);
  }
  EXPECT_LT(chi2, 29.6);
}

TEST(EndoApplyMatrix, Laws) {
  auto r = ring_of(11, 4, 12);
  Rng rng(17);
  for (int i = 0; i < 100; ++i) {
    const Endomorphism phi = endo_generate(r, 2, 3, rng);
    const MatrixR a = random_matrix(r, 3, 3, true, rng);
    const MatrixR b = random_matrix(r, 3, 3, true, rng);
    ASSERT_EQ(endo_apply_matrix(phi, MatrixR::identity(r, 3)), MatrixR::identity(r, 3));
    ASSERT_EQ(endo_apply_matrix(phi, mat_mul(a, b)), mat_mul(endo_apply_matrix(phi, a), endo_apply_matrix(phi, b)));
    ASSERT_EQ(endo_apply_matrix(phi, mat_add(a, b)), mat_add(endo_apply_matrix(phi, a), endo_apply_matrix(phi, b)));
  }
}

TEST(EndoApplyFactors, MatchesMaskedExpansion) {
  auto r = ring_of(11, 4, 12);
  Rng rng(18);
  for (int i = 0; i < 30; ++i) {
    const Endomorphism phi = endo_generate(r, 2, 3, rng);
    const FactoredInvertible key = gen_private_key(r, 3, 10, 3, rng);
    const MatrixR b = random_matrix(r, 3, 3, true, rng);
    const auto factors = endo_apply_factors(phi, key);
    const MatrixR masked = factors.empty() ? endo_apply_matrix(phi, b) : conjugate(factors, endo_apply_matrix(phi, b));
    ASSERT_EQ(masked, endo_apply_matrix(phi, conjugate(key, b)));
  }
}

TEST(SparsityGrowth, SingleFactor) {
  auto r = ring_of(11, 4, 64);
  Rng rng(19);
  const SparsityReport rep = measure_sparsity_growth(r, 3, 1, 5, 20, rng);
  EXPECT_LE(rep.max_terms, 5U);
  EXPECT_EQ(rep.trials.size(), 20U);
}

TEST(SparsityGrowth, TwoChainedFactors) {
  auto r = ring_of(11, 4, 64);
  Rng rng(20);
  const TruncatedPoly u = random_sparse_poly(r, 3, false, rng);
  const TruncatedPoly v = random_sparse_poly(r, 3, false, rng);
  const FactoredInvertible key(r, 3, {{0, 1, u}, {1, 2, v}});
  EXPECT_EQ(longest_matching_chain(key.factors()), 2U);
  EXPECT_LE(key.expand().at(0, 2).size(), 9U);
  EXPECT_EQ(key.expand().at(0, 2), poly_mul(u, v));
}

TEST(SparsityGrowth, DefaultShapeStaysUnderCap) {
  auto r = ring_of(11, 4, 16);
  Rng rng(21);
  const SparsityReport rep = measure_sparsity_growth(r, 3, 27, 5, 3, rng);
  EXPECT_GT(rep.max_terms, 0U);
  EXPECT_LE(static_cast<double>(rep.max_terms), rep.monomial_cap);
}
