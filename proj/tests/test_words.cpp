#include <gtest/gtest.h>

#include <functional>

#include "pglfree/error.hpp"
#include "pglfree/pgl.hpp"
#include "pglfree/rng.hpp"
#include "pglfree/words.hpp"

using namespace pglfree;

namespace {

// Plain recursive enumeration over letter sequences with its own matrix products; returns the
// number of reduced words of length <= max_len evaluating to a scalar matrix.
std::uint64_t oracle_relations(const std::vector<Mat2>& gens, std::uint32_t max_len, std::uint64_t* words = nullptr) {
  std::vector<Mat2> letters;
  const std::uint32_t p = gens.front().p;
  for (const auto& g : gens) {
    letters.push_back(g);
    letters.push_back(g.adjugate());
  }
  std::uint64_t found = 0, seen = 0;
  std::function<void(const Mat2&, int, std::uint32_t)> rec = [&](const Mat2& acc, int last, std::uint32_t len) {
    for (int c = 0; c < static_cast<int>(letters.size()); ++c) {
      if (last >= 0 && (c ^ 1) == last) continue;
      const Mat2 next = acc * letters[static_cast<std::size_t>(c)];
      ++seen;
      if (next.is_scalar()) ++found;
      if (len + 1 < max_len) rec(next, c, len + 1);
    }
  };
  rec(Mat2::make(p, 1, 0, 0, 1), -1, 0);
  if (words) *words = seen;
  return found;
}

std::vector<Mat2> matrices(const std::vector<PglElement>& gens) {
  std::vector<Mat2> out;
  for (const auto& g : gens) out.push_back(g.matrix());
  return out;
}

std::vector<PglElement> unipotent_pair() {
  return {canonicalize(Mat2::make(5, 1, 1, 0, 1)), canonicalize(Mat2::make(5, 1, 0, 1, 1))};
}

bool is_relation(const ReducedWord& w, const std::vector<PglElement>& gens) {
  const auto t = table_for(gens.front().modulus());
  return evaluate(w, gens, *t).is_identity();
}

}  // namespace

TEST(Words, ParseFormatInverse) {
  const auto w = ReducedWord::parse("abAB");
  EXPECT_EQ(w.size(), 4u);
  EXPECT_EQ(w.to_string(), "abAB");
  EXPECT_EQ(w.inverse().to_string(), "baBA");
  EXPECT_EQ(w.symbol_count(), 2u);
  try {
    ReducedWord::parse("aA");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotReduced);
  }
  try {
    ReducedWord::parse("");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyWord);
  }
  const std::vector<Letter> l{{0, 1}, {1, 1}, {1, -1}, {0, 1}};
  EXPECT_EQ(free_reduce(l).size(), 2u);
}

TEST(Words, ReducedWordCountMatchesEnumeration) {
  for (std::uint32_t k = 1; k <= 3; ++k) {
    for (std::uint32_t len = 1; len <= 4; ++len) {
      std::vector<Mat2> dummy(k, Mat2::make(7, 1, 1, 0, 1));
      std::uint64_t words = 0;
      oracle_relations(dummy, len, &words);
      EXPECT_EQ(reduced_words_up_to(k, len), words);
    }
  }
  EXPECT_EQ(reduced_word_count(2, 3), 4u * 3 * 3);
}

TEST(Words, UnipotentPairInGamma5) {
  const auto gens = unipotent_pair();
  const auto t = table_for(5);
  for (auto method : {RelationMethod::dfs, RelationMethod::meet_in_middle}) {
    RelationOptions opts;
    opts.method = method;
    const auto r4 = check_no_relations(gens, 4, *t, opts);
    EXPECT_TRUE(r4.clean()) << to_string(method);
    EXPECT_EQ(oracle_relations(matrices(gens), 4), 0u);
    const auto r5 = check_no_relations(gens, 5, *t, opts);
    ASSERT_TRUE(r5.witness.has_value()) << to_string(method);
    EXPECT_LE(r5.witness->size(), 5u);
    EXPECT_TRUE(is_relation(*r5.witness, gens));
  }
  EXPECT_GT(oracle_relations(matrices(gens), 5), 0u);
  const auto r5 = check_no_relations(gens, 5, *t);
  EXPECT_EQ(r5.witness->to_string(), "aaaaa");
}

TEST(Words, MeetInMiddleAgreesWithDfsOnRandomInstances) {
  Stream rng(2024, "mitm-vs-dfs");
  int instances = 0, with_relation = 0;
  for (int i = 0; i < 100; ++i) {
    const std::uint32_t p = rng.below(2) ? 5 : 7;
    const auto t = table_for(p);
    const auto k = static_cast<std::uint32_t>(2 + rng.below(2));
    const auto ell = static_cast<std::uint32_t>(3 + rng.below(4));
    std::vector<PglElement> gens;
    for (std::uint32_t j = 0; j < k; ++j) gens.push_back(sample_uniform(*t, rng));
    RelationOptions dfs, mitm;
    mitm.method = RelationMethod::meet_in_middle;
    const auto a = check_no_relations(gens, ell, *t, dfs);
    const auto b = check_no_relations(gens, ell, *t, mitm);
    ASSERT_FALSE(a.inconclusive || b.inconclusive);
    ASSERT_EQ(a.witness.has_value(), b.witness.has_value()) << "instance " << i;
    const bool oracle = oracle_relations(matrices(gens), ell) > 0;
    ASSERT_EQ(a.witness.has_value(), oracle) << "instance " << i;
    for (const auto* r : {&a, &b}) {
      if (r->witness) {
        EXPECT_LE(r->witness->size(), ell);
        EXPECT_TRUE(is_relation(*r->witness, gens));
      }
    }
    ++instances;
    with_relation += a.witness ? 1 : 0;
  }
  EXPECT_EQ(instances, 100);
  EXPECT_GT(with_relation, 0);
  EXPECT_LT(with_relation, 100);
}

TEST(Words, SerialAndParallelDfsAreIdentical) {
  Stream rng(99, "serial-parallel");
  const auto t = table_for(11);
  for (int i = 0; i < 20; ++i) {
    std::vector<PglElement> gens;
    for (int j = 0; j < 3; ++j) gens.push_back(sample_uniform(*t, rng));
    RelationOptions ser, par;
    ser.parallel = false;
    par.parallel = true;
    const auto a = check_no_relations(gens, 6, *t, ser);
    const auto b = check_no_relations(gens, 6, *t, par);
    EXPECT_EQ(a.witness, b.witness);
    EXPECT_EQ(a.words_checked, b.words_checked);
    EXPECT_EQ(a.inconclusive, b.inconclusive);
  }
}

TEST(Words, BudgetMakesReportInconclusive) {
  const auto t = table_for(13);
  Stream rng(5, "budget");
  std::vector<PglElement> gens;
  for (int j = 0; j < 2; ++j) gens.push_back(sample_uniform(*t, rng));
  // Regardless of the verdict, a budget of 10 words at length 8 cannot finish cleanly.
  RelationOptions opts;
  opts.word_budget = 10;
  const auto r = check_no_relations(gens, 8, *t, opts);
  EXPECT_FALSE(r.clean());
  if (!r.witness) {
    EXPECT_TRUE(r.inconclusive);
  }
}

TEST(Words, InjectivityMatchesDoubleLengthGirth) {
  Stream rng(17, "injectivity");
  const auto t = table_for(7);
  for (int i = 0; i < 20; ++i) {
    std::vector<PglElement> gens{sample_uniform(*t, rng), sample_uniform(*t, rng)};
    const auto inj = check_word_image_injectivity(gens, 2, *t);
    const auto rel = check_no_relations(gens, 4, *t);
    EXPECT_EQ(inj.injective, rel.clean());
  }
}

TEST(Words, RepeatedGeneratorsAreDistinctLetters) {
  const auto t = table_for(7);
  const auto g = canonicalize(Mat2::make(7, 1, 2, 3, 1));
  const std::vector<PglElement> gens{g, g};
  const auto r = check_no_relations(gens, 2, *t);
  ASSERT_TRUE(r.witness.has_value());
  EXPECT_TRUE(is_relation(*r.witness, gens));
}
