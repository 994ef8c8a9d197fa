#include <gtest/gtest.h>

#include <set>

#include "conjauth/endomorphism.hpp"
#include "conjauth/error.hpp"
#include "oracle.hpp"

using namespace conjauth;

namespace {

RingPtr ring_of(std::uint32_t p, std::uint32_t k, std::uint32_t N) { return Ring::create(RingParams::make(p, k, N)); }

TruncatedPoly x(const RingPtr& r, std::uint32_t var, std::uint32_t c = 1) { return TruncatedPoly::variable(r, var, c); }

TruncatedPoly random_poly(const RingPtr& r, Rng& rng, bool constant = true) {
  return random_sparse_poly(r, static_cast<std::uint32_t>(rng.uniform(1, 6)), constant, rng);
}

}  // namespace

TEST(RingParams, Validation) {
  EXPECT_NO_THROW(RingParams::make(11, 10, 1000).validate());
  EXPECT_THROW(RingParams::make(12, 2, 5).validate(), InvalidParameter);
  EXPECT_THROW(RingParams::make(257, 2, 5).validate(), InvalidParameter);
  EXPECT_THROW(RingParams::make(11, 0, 5).validate(), InvalidParameter);
  RingParams bad = RingParams::make(11, 2, 5);
  bad.max_gen_degree = 5;
  EXPECT_THROW(bad.validate(), InvalidParameter);
  EXPECT_EQ(RingParams::make(11, 1, 2).max_gen_degree, 1U);
}

TEST(Monomial, GradedLexOrder) {
  auto r = ring_of(11, 3, 10);
  std::vector<std::vector<std::uint32_t>> ordered = {{0, 0, 0}, {0, 0, 1}, {0, 1, 0}, {1, 0, 0},
                                                      {0, 0, 2}, {0, 1, 1}, {1, 0, 1}, {2, 0, 0}};
  for (std::size_t i = 1; i < ordered.size(); ++i) {
    EXPECT_LT(r->pack(ordered[i - 1]), r->pack(ordered[i]));
  }
  EXPECT_EQ(r->unpack(r->pack(std::vector<std::uint32_t>{3, 1, 2})), (std::vector<std::uint32_t>{3, 1, 2}));
  EXPECT_THROW(r->pack(std::vector<std::uint32_t>{5, 5, 0}), InvalidParameter);
}

TEST(PolyAdd, Examples) {
  auto r = ring_of(11, 2, 5);
  const TruncatedPoly a = x(r, 0, 3) + x(r, 1, 5);
  EXPECT_EQ(a + TruncatedPoly(r), a);
  EXPECT_TRUE(poly_add(x(r, 0, 3), x(r, 0, 8)).is_zero());
  EXPECT_EQ(poly_add(a, x(r, 1, 2)), x(r, 0, 3) + x(r, 1, 7));
  EXPECT_EQ(poly_add(a, x(r, 1, 2)).to_string(), "3*x1 + 7*x2");
}

TEST(PolyAdd, MismatchedRingsThrow) {
  auto r1 = ring_of(11, 2, 5);
  auto r2 = ring_of(11, 2, 6);
  EXPECT_THROW(poly_add(x(r1, 0), x(r2, 0)), ParameterMismatch);
  EXPECT_THROW(poly_mul(x(r1, 0), x(r2, 0)), ParameterMismatch);
}

TEST(PolyMul, Examples) {
  auto r3 = ring_of(11, 2, 3);
  const TruncatedPoly a = x(r3, 0, 3) + x(r3, 1, 5);
  const TruncatedPoly expect = TruncatedPoly::monomial(r3, std::vector<std::uint32_t>{2, 0}, 6) +
                               TruncatedPoly::monomial(r3, std::vector<std::uint32_t>{1, 1}, 10);
  EXPECT_EQ(poly_mul(a, x(r3, 0, 2)), expect);

  auto r2 = ring_of(11, 2, 2);
  EXPECT_TRUE(poly_mul(x(r2, 0, 3) + x(r2, 1, 5), x(r2, 0, 2)).is_zero());

  auto r = ring_of(11, 2, 7);
  const TruncatedPoly top = TruncatedPoly::monomial(r, std::vector<std::uint32_t>{6, 0});
  EXPECT_FALSE(top.is_zero());
  EXPECT_TRUE(poly_mul(top, x(r, 0)).is_zero());
}

TEST(PolyScalarMul, Examples) {
  auto r = ring_of(11, 2, 5);
  Rng rng(3);
  const TruncatedPoly a = random_poly(r, rng);
  EXPECT_EQ(poly_scalar_mul(1, a), a);
  EXPECT_TRUE(poly_scalar_mul(0, a).is_zero());
  EXPECT_EQ(poly_scalar_mul(4, x(r, 0, 3)), x(r, 0, 1));
}

TEST(IsUnit, Examples) {
  auto r = ring_of(11, 2, 5);
  EXPECT_TRUE(is_unit(TruncatedPoly::constant(r, 5)));
  EXPECT_FALSE(is_unit(x(r, 0)));
  EXPECT_FALSE(is_unit(TruncatedPoly(r)));
}

TEST(RandomSparsePoly, Contract) {
  auto r = ring_of(11, 2, 10);
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    const TruncatedPoly a = random_sparse_poly(r, 3, true, rng);
    EXPECT_LE(a.size(), 3U);
    EXPECT_TRUE(a.is_canonical());
    for (auto c : a.coeffs()) {
      EXPECT_GE(c, 1);
      EXPECT_LE(c, 10);
    }
    EXPECT_LE(a.degree(), r->params().max_gen_degree);
  }
}

TEST(RandomSparsePoly, Deterministic) {
  auto r = ring_of(11, 4, 64);
  Rng a(42);
  Rng b(42);
  for (int i = 0; i < 50; ++i) EXPECT_EQ(random_sparse_poly(r, 5, true, a), random_sparse_poly(r, 5, true, b));
}

TEST(RandomSparsePoly, NoConstantWhenDisallowed) {
  auto r = ring_of(11, 3, 20);
  Rng rng(9);
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(random_sparse_poly(r, 5, false, rng).constant_term(), 0);
}

TEST(RandomSparsePoly, RestrictedVariables) {
  auto r = ring_of(11, 4, 20);
  Rng rng(2);
  const std::vector<std::uint32_t> vars = {1, 3};
  for (int i = 0; i < 200; ++i) {
    const TruncatedPoly a = random_sparse_poly(r, 5, false, rng, 0, vars);
    for (auto key : a.keys()) {
      EXPECT_EQ(r->exponent(key, 0), 0U);
      EXPECT_EQ(r->exponent(key, 2), 0U);
    }
  }
}

TEST(PolyMul, MatchesOracle) {
  Rng rng(11);
  for (auto [k, N] : {std::pair{1U, 5U}, {2U, 7U}, {3U, 9U}, {4U, 12U}}) {
    auto r = ring_of(11, k, N);
    for (int i = 0; i < 200; ++i) {
      const TruncatedPoly a = random_sparse_poly(r, 8, true, rng);
      const TruncatedPoly b = random_sparse_poly(r, 8, true, rng);
      EXPECT_EQ(poly_mul(a, b), oracle::to(r, oracle::mul(oracle::from(a), oracle::from(b))));
      EXPECT_EQ(poly_add(a, b), oracle::to(r, oracle::add(oracle::from(a), oracle::from(b))));
    }
  }
}

TEST(PolyMul, DenseOperandsMatchOracle) {
  auto r = ring_of(7, 3, 10);
  Rng rng(5);
  for (int i = 0; i < 10; ++i) {
    TruncatedPoly a = TruncatedPoly::constant(r, 1);
    TruncatedPoly b = TruncatedPoly::constant(r, 2);
    for (int s = 0; s < 4; ++s) {
      a = poly_add(poly_mul(a, random_sparse_poly(r, 4, true, rng)), random_sparse_poly(r, 3, false, rng));
      b = poly_add(poly_mul(b, random_sparse_poly(r, 4, true, rng)), random_sparse_poly(r, 3, false, rng));
    }
    EXPECT_EQ(poly_mul(a, b), oracle::to(r, oracle::mul(oracle::from(a), oracle::from(b))));
  }
}

TEST(PolyMul, HashPathMatchesOracle) {
  // 12 variables with an 8-bit digit give a grid index far over the limit.
  auto r = ring_of(13, 12, 200);
  Rng rng(8);
  for (int i = 0; i < 100; ++i) {
    const TruncatedPoly a = random_sparse_poly(r, 12, true, rng);
    const TruncatedPoly b = random_sparse_poly(r, 12, true, rng);
    EXPECT_EQ(poly_mul(a, b), oracle::to(r, oracle::mul(oracle::from(a), oracle::from(b))));
  }
}

TEST(RingAxioms, RandomTriples) {
  auto r = ring_of(11, 3, 8);
  Rng rng(2024);
  for (int i = 0; i < 1000; ++i) {
    const TruncatedPoly a = random_poly(r, rng);
    const TruncatedPoly b = random_poly(r, rng);
    const TruncatedPoly c = random_poly(r, rng);
    ASSERT_EQ(poly_add(poly_add(a, b), c), poly_add(a, poly_add(b, c)));
    ASSERT_EQ(poly_add(a, b), poly_add(b, a));
    ASSERT_EQ(poly_mul(poly_mul(a, b), c), poly_mul(a, poly_mul(b, c)));
    ASSERT_EQ(poly_mul(a, b), poly_mul(b, a));
    ASSERT_EQ(poly_mul(a, poly_add(b, c)), poly_add(poly_mul(a, b), poly_mul(a, c)));
    ASSERT_TRUE(poly_add(a, -a).is_zero());
    ASSERT_EQ(poly_mul(a, TruncatedPoly::constant(r, 1)), a);
  }
}

TEST(Nilpotency, ZeroConstantTermPowersVanish) {
  Rng rng(7);
  for (auto N : {2U, 5U, 9U}) {
    auto r = ring_of(11, 2, N);
    for (int i = 0; i < 200; ++i) {
      const TruncatedPoly a = random_sparse_poly(r, 4, false, rng);
      if (a.is_zero()) continue;
      const std::uint32_t e = (N + a.min_degree() - 1) / a.min_degree();
      ASSERT_TRUE(poly_pow(a, e).is_zero());
    }
  }
}

TEST(PolyInverse, RandomUnits) {
  auto r = ring_of(11, 3, 10);
  Rng rng(77);
  int checked = 0;
  while (checked < 100) {
    const TruncatedPoly a = random_poly(r, rng);
    if (!is_unit(a)) continue;
    ++checked;
    ASSERT_EQ(poly_mul(a, poly_inverse(a)), TruncatedPoly::constant(r, 1));
  }
  EXPECT_THROW(poly_inverse(x(r, 0)), InvalidParameter);
}

TEST(CanonicalForm, RenormalizingIsIdentity) {
  auto r = ring_of(11, 3, 12);
  Rng rng(4);
  for (int i = 0; i < 200; ++i) {
    const TruncatedPoly a = poly_mul(random_poly(r, rng), random_poly(r, rng));
    ASSERT_TRUE(a.is_canonical());
    std::vector<std::pair<MonoKey, std::uint32_t>> terms;
    for (std::size_t t = a.size(); t-- > 0;) terms.emplace_back(a.keys()[t], a.coeffs()[t]);
    const TruncatedPoly b = TruncatedPoly::from_terms(r, terms);
    ASSERT_TRUE(std::equal(a.keys().begin(), a.keys().end(), b.keys().begin(), b.keys().end()));
    ASSERT_TRUE(std::equal(a.coeffs().begin(), a.coeffs().end(), b.coeffs().begin(), b.coeffs().end()));
  }
}

TEST(FromTerms, MergesAndTruncates) {
  auto r = ring_of(11, 2, 3);
  const MonoKey x1 = r->pack(std::vector<std::uint32_t>{1, 0});
  const MonoKey big = r->pack(std::vector<std::uint32_t>{1, 1});
  const TruncatedPoly a = TruncatedPoly::from_terms(r, {{x1, 4}, {x1, 7}, {big, 3}, {0, 22}});
  EXPECT_EQ(a, TruncatedPoly::monomial(r, std::vector<std::uint32_t>{1, 1}, 3));
}

TEST(EndoGenerate, Contract) {
  auto r = ring_of(11, 3, 20);
  Rng rng(6);
  for (int i = 0; i < 50; ++i) {
    const Endomorphism phi = endo_generate(r, 1, 5, rng);
    ASSERT_EQ(phi.images().size(), 3U);
    ASSERT_EQ(phi.k0(), 1U);
    const std::uint32_t omitted = phi.omitted()[0];
    for (const auto& f : phi.images()) {
      EXPECT_EQ(f.constant_term(), 0);
      EXPECT_LE(f.size(), 5U);
      EXPECT_LE(f.degree(), 3U);
      for (auto key : f.keys()) EXPECT_EQ(r->exponent(key, omitted), 0U);
    }
  }
}

TEST(EndoGenerate, RejectsBadK0) {
  auto r = ring_of(11, 3, 20);
  Rng rng(6);
  EXPECT_THROW(endo_generate(r, 3, 5, rng), InvalidParameter);
  EXPECT_THROW(endo_generate(r, 0, 5, rng), InvalidParameter);
}

TEST(Endomorphism, ValidationRejectsBrokenImages) {
  auto r = ring_of(11, 2, 5);
  EXPECT_THROW(Endomorphism(r, {TruncatedPoly::constant(r, 1), TruncatedPoly(r)}, {1}), InvalidParameter);
  EXPECT_THROW(Endomorphism(r, {x(r, 1), TruncatedPoly(r)}, {1}), InvalidParameter);
  EXPECT_THROW(Endomorphism(r, {x(r, 0), x(r, 0)}, {}), InvalidParameter);
  EXPECT_NO_THROW(Endomorphism(r, {x(r, 0), TruncatedPoly(r)}, {1}));
}

TEST(EndoApply, Examples) {
  auto r = ring_of(11, 2, 5);
  // x1 -> x2, x2 -> 0.
  const Endomorphism phi(r, {x(r, 1), TruncatedPoly(r)}, {0});
  EXPECT_EQ(endo_apply_poly(phi, x(r, 0, 3) + x(r, 1, 5)), x(r, 1, 3));
  EXPECT_EQ(endo_apply_poly(phi, TruncatedPoly::constant(r, 7)), TruncatedPoly::constant(r, 7));
}

TEST(EndoApply, MatchesOracleSubstitution) {
  Rng rng(12);
  for (auto [k, N] : {std::pair{2U, 8U}, {3U, 10U}, {4U, 12U}, {5U, 9U}}) {
    auto r = ring_of(11, k, N);
    for (int i = 0; i < 60; ++i) {
      const Endomorphism phi = endo_generate(r, static_cast<std::uint32_t>(rng.uniform(1, k - 1)), 3, rng);
      std::vector<oracle::Poly> images;
      for (const auto& f : phi.images()) images.push_back(oracle::from(f));
      TruncatedPoly a = random_sparse_poly(r, 6, true, rng);
      a = poly_add(poly_mul(a, random_sparse_poly(r, 4, true, rng)), random_sparse_poly(r, 5, true, rng));
      ASSERT_EQ(endo_apply_poly(phi, a), oracle::to(r, oracle::substitute(oracle::from(a), images)));
    }
  }
}

TEST(EndoApply, SparseRouteMatchesOracle) {
  // Twelve kept variables are too many for dense buffers.
  auto r = ring_of(11, 14, 12);
  Rng rng(21);
  for (int i = 0; i < 10; ++i) {
    const Endomorphism phi = endo_generate(r, 2, 3, rng);
    std::vector<oracle::Poly> images;
    for (const auto& f : phi.images()) images.push_back(oracle::from(f));
    const TruncatedPoly a = poly_mul(random_sparse_poly(r, 6, true, rng), random_sparse_poly(r, 6, true, rng));
    ASSERT_EQ(endo_apply_poly(phi, a), oracle::to(r, oracle::substitute(oracle::from(a), images)));
  }
}

TEST(EndoApply, EvaluatorReuseIsConsistent) {
  auto r = ring_of(11, 4, 30);
  Rng rng(3);
  const Endomorphism phi = endo_generate(r, 2, 3, rng);
  EndoEvaluator evaluator(phi);
  for (int i = 0; i < 50; ++i) {
    const TruncatedPoly a = poly_mul(random_poly(r, rng), random_poly(r, rng));
    ASSERT_EQ(evaluator.apply(a), endo_apply_poly(phi, a));
  }
}

TEST(EndoApply, HomomorphismLaws) {
  auto r = ring_of(11, 4, 16);
  Rng rng(99);
  for (int i = 0; i < 1000; ++i) {
    const Endomorphism phi = endo_generate(r, static_cast<std::uint32_t>(rng.uniform(1, 3)), 3, rng);
    const TruncatedPoly a = random_poly(r, rng);
    const TruncatedPoly b = random_poly(r, rng);
    ASSERT_EQ(endo_apply_poly(phi, poly_add(a, b)), poly_add(endo_apply_poly(phi, a), endo_apply_poly(phi, b)));
    ASSERT_EQ(endo_apply_poly(phi, poly_mul(a, b)), poly_mul(endo_apply_poly(phi, a), endo_apply_poly(phi, b)));
  }
}

TEST(EndoApply, MismatchedRingThrows) {
  auto r = ring_of(11, 2, 5);
  auto other = ring_of(11, 2, 6);
  const Endomorphism phi(r, {x(r, 1), TruncatedPoly(r)}, {0});
  EXPECT_THROW(endo_apply_poly(phi, x(other, 0)), ParameterMismatch);
}

TEST(EndoLinearPart, RankBelowK) {
  Rng rng(31);
  for (auto k : {2U, 4U, 10U}) {
    auto r = ring_of(11, k, 30);
    for (int i = 0; i < 100; ++i) {
      const auto k0 = static_cast<std::uint32_t>(rng.uniform(1, k - 1));
      const Endomorphism phi = endo_generate(r, k0, 5, rng);
      ASSERT_LE(rank_mod_p(endo_linear_part(phi), *r), k - k0);
    }
  }
}
