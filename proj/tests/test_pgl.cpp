#include <gtest/gtest.h>

#include <boost/math/distributions/chi_squared.hpp>

#include <array>
#include <set>
#include <tuple>

#include "pglfree/error.hpp"
#include "pglfree/pgl.hpp"
#include "pglfree/rng.hpp"

using namespace pglfree;

namespace {

using Quad = std::array<std::uint32_t, 4>;

// Brute-force canonical form: scale so the first nonzero entry is 1, finding the inverse by search.
Quad oracle_canonical(std::uint32_t p, Quad m) {
  std::uint32_t lead = 0;
  for (auto x : m) {
    if (x != 0) {
      lead = x;
      break;
    }
  }
  std::uint32_t inv = 0;
  for (std::uint32_t t = 1; t < p; ++t) {
    if (lead * t % p == 1) inv = t;
  }
  for (auto& x : m) x = x * inv % p;
  return m;
}

std::set<Quad> oracle_group(std::uint32_t p) {
  std::set<Quad> out;
  for (std::uint32_t a = 0; a < p; ++a)
    for (std::uint32_t b = 0; b < p; ++b)
      for (std::uint32_t c = 0; c < p; ++c)
        for (std::uint32_t d = 0; d < p; ++d)
          if ((a * d + p * p - b * c) % p != 0) out.insert(oracle_canonical(p, {a, b, c, d}));
  return out;
}

Quad quad(const PglElement& g) { return {g.a(), g.b(), g.c(), g.d()}; }

}  // namespace

TEST(Pgl, OrderMatchesFormulaAndBruteForce) {
  const std::uint64_t expected[] = {6, 24, 120, 336, 1320, 2184};
  const std::uint32_t primes[] = {2, 3, 5, 7, 11, 13};
  for (int i = 0; i < 6; ++i) {
    const auto t = GroupTable::build(primes[i]);
    EXPECT_EQ(t.order(), expected[i]);
    EXPECT_EQ(order_formula(primes[i]), expected[i]);
    if (primes[i] <= 7) {
      const auto oracle = oracle_group(primes[i]);
      std::set<Quad> mine;
      for (const auto& g : t.elements()) mine.insert(quad(g));
      EXPECT_EQ(mine, oracle);
    }
  }
}

TEST(Pgl, RankIsInverseOfEnumeration) {
  for (std::uint32_t p : {2u, 3u, 5u, 7u, 11u}) {
    const auto t = GroupTable::build(p);
    for (std::uint32_t i = 0; i < t.order(); ++i) {
      ASSERT_EQ(t.index_of(t.element(i)), i);
      if (i > 0) {
        ASSERT_LT(t.element(i - 1), t.element(i));
      }
    }
    EXPECT_TRUE(t.element(t.identity_index()).is_identity());
  }
}

TEST(Pgl, GroupAxiomsExhaustiveOnGamma3) {
  const auto t = GroupTable::build(3);
  const auto e = pgl_identity(3);
  for (const auto& x : t.elements()) {
    EXPECT_EQ(mul(x, e), x);
    EXPECT_EQ(mul(e, x), x);
    EXPECT_TRUE(mul(x, inv(x)).is_identity());
    EXPECT_TRUE(mul(inv(x), x).is_identity());
    for (const auto& y : t.elements()) {
      const auto xy = mul(x, y);
      // closure against the brute-force product of representatives
      const Quad raw{(x.a() * y.a() + x.b() * y.c()) % 3, (x.a() * y.b() + x.b() * y.d()) % 3,
                     (x.c() * y.a() + x.d() * y.c()) % 3, (x.c() * y.b() + x.d() * y.d()) % 3};
      ASSERT_EQ(quad(xy), oracle_canonical(3, raw));
      for (const auto& z : t.elements()) ASSERT_EQ(mul(xy, z), mul(x, mul(y, z)));
    }
  }
}

TEST(Pgl, CanonicalizeAndErrors) {
  const auto g = canonicalize(Mat2::make(7, 3, 1, 0, 2));
  EXPECT_EQ(g.a(), 1u);
  EXPECT_EQ(quad(g), oracle_canonical(7, {3, 1, 0, 2}));
  EXPECT_EQ(canonicalize(Mat2::make(7, 2, 0, 0, 2)), pgl_identity(7));
  EXPECT_EQ(canonicalize(Mat2::make(5, -1, 0, 0, -1)), pgl_identity(5));
  try {
    canonicalize(Mat2::make(5, 1, 2, 2, 4));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SingularMatrix);
  }
  try {
    mul(pgl_identity(5), pgl_identity(7));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ModulusMismatch);
  }
  try {
    GroupTable::build(9);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotPrime);
  }
  try {
    GroupTable::build(13, 1000);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::TooLarge);
  }
}

TEST(Pgl, EncodingRoundTripAndRejection) {
  const auto t = GroupTable::build(5);
  for (const auto& g : t.elements()) {
    const Encoding e = g.encode();
    EXPECT_EQ(e[0], 5);
    EXPECT_EQ(PglElement::decode(e), g);
  }
  auto raw = [](std::uint32_t p, std::uint32_t a, std::uint32_t b, std::uint32_t c, std::uint32_t d) {
    Encoding e{};
    const std::uint32_t w[] = {p, a, b, c, d};
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 4; ++j) e[4 * i + j] = static_cast<std::uint8_t>(w[i] >> (8 * j));
    return e;
  };
  EXPECT_EQ(PglElement::decode(raw(5, 1, 2, 3, 4)), canonicalize(Mat2::make(5, 1, 2, 3, 4)));
  for (const auto& bad : {raw(5, 2, 0, 0, 1), raw(5, 1, 2, 2, 4), raw(6, 1, 0, 0, 1), raw(5, 1, 5, 0, 1)}) {
    try {
      PglElement::decode(bad);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::Format);
    }
  }
}

TEST(Pgl, SampleUniformChiSquared) {
  const auto t = table_for(5);
  const std::uint64_t n = 120'000;
  std::vector<std::uint64_t> hist(t->order(), 0);
  Stream rng(42, "chi-squared");
  for (std::uint64_t i = 0; i < n; ++i) ++hist[t->index_of(sample_uniform(*t, rng))];
  const double expect = static_cast<double>(n) / t->order();
  double chi2 = 0.0;
  for (auto h : hist) chi2 += (h - expect) * (h - expect) / expect;
  const boost::math::chi_squared dist(static_cast<double>(t->order() - 1));
  EXPECT_LT(chi2, boost::math::quantile(dist, 0.999));
  EXPECT_GT(chi2, boost::math::quantile(dist, 0.001));
}

TEST(Rng, StreamsArePureFunctionsOfTheirCoordinates) {
  Stream a(7, "tag", 1, 2, 3), b(7, "tag", 1, 2, 3), c(7, "tag", 1, 2, 4), d(7, "other", 1, 2, 3);
  EXPECT_EQ(a.key(), b.key());
  EXPECT_NE(a.key(), c.key());
  EXPECT_NE(a.key(), d.key());
  for (int i = 0; i < 100; ++i) {
    const auto x = a.at(static_cast<std::uint64_t>(i));
    EXPECT_EQ(b.next(), x);
  }
  // documented draw formula
  EXPECT_EQ(a.at(0), mix64(a.key() + 0x9E3779B97F4A7C15ULL));
  Stream u(1, "below");
  for (int i = 0; i < 1000; ++i) {
    EXPECT_LT(u.below(7), 7u);
    const double x = u.uniform01();
    EXPECT_GE(x, 0.0);
    EXPECT_LT(x, 1.0);
  }
}
