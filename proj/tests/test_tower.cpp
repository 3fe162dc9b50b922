#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_int.hpp>

#include <set>

#include "pglfree/io.hpp"
#include "pglfree/tower.hpp"

using namespace pglfree;

namespace {

std::vector<PglElement> distinct_gens(const GroupTable& t, std::uint32_t k, Stream& rng) {
  std::set<PglElement> seen;
  std::vector<PglElement> out;
  while (out.size() < k) {
    const auto g = sample_uniform(t, rng);
    if (seen.insert(g).second) out.push_back(g);
  }
  return out;
}

// Dense norm of the F_n averaging operator on l^2(K_n) composed with the projection that
// removes fibre means of the last coordinate; indices are mixed-radix, last coordinate fastest.
double oracle_level_norm(const LevelSet& level, const std::vector<std::uint32_t>& primes) {
  std::vector<std::shared_ptr<const GroupTable>> tables;
  std::uint64_t dim = 1;
  for (auto p : primes) {
    tables.push_back(table_for(p));
    dim *= tables.back()->order();
  }
  const std::uint64_t block = tables.back()->order();
  auto index = [&](const TupleElement& x) {
    std::uint64_t i = 0;
    for (std::size_t c = 0; c < x.size(); ++c) i = i * tables[c]->order() + tables[c]->index_of(x.coords[c]);
    return i;
  };
  std::vector<TupleElement> all(1);
  for (const auto& t : tables) {
    std::vector<TupleElement> next;
    for (const auto& prefix : all) {
      for (const auto& g : t->elements()) {
        TupleElement e = prefix;
        e.coords.push_back(g);
        next.push_back(e);
      }
    }
    all = std::move(next);
  }
  const auto n = static_cast<Eigen::Index>(dim);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (const auto& f : level.elements) {
    for (const auto& x : all) {
      m(static_cast<Eigen::Index>(index(tuple_mul(f, x))), static_cast<Eigen::Index>(index(x))) +=
          1.0 / level.elements.size();
    }
  }
  Eigen::MatrixXd proj = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index b = 0; b < n; b += static_cast<Eigen::Index>(block)) {
    proj.block(b, b, static_cast<Eigen::Index>(block), static_cast<Eigen::Index>(block)).array() -= 1.0 / block;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m * proj);
  return svd.singularValues()(0);
}

double oracle_base_norm(const GroupTable& t, const std::vector<PglElement>& gens) {
  LevelSet l = build_base_level(t.prime(), gens);
  return oracle_level_norm(l, {t.prime()});
}

std::uint64_t naive_closure(const std::vector<PglElement>& gens) {
  std::set<PglElement> s(gens.begin(), gens.end());
  s.insert(pgl_identity(gens.front().modulus()));
  for (bool grew = true; grew;) {
    grew = false;
    const std::vector<PglElement> cur(s.begin(), s.end());
    for (const auto& a : cur) {
      for (const auto& b : gens) grew = s.insert(mul(a, b)).second || grew;
    }
  }
  return s.size();
}

}  // namespace

TEST(Tower, RatioParsing) {
  EXPECT_EQ(Ratio::parse("9/10"), Ratio::make(9, 10));
  EXPECT_EQ(Ratio::parse("0.9"), Ratio::make(9, 10));
  EXPECT_EQ(Ratio::parse("0.70"), Ratio::make(7, 10));
  EXPECT_EQ(Ratio::parse("3"), Ratio::make(3, 1));
  EXPECT_EQ(Ratio::make(4, 8).to_string(), "1/2");
  EXPECT_TRUE(Ratio::make(1, 3) < Ratio::make(1, 2));
  for (const char* bad : {"", "1/0", "x", "0.1.2", "-1"}) {
    EXPECT_THROW(Ratio::parse(bad), Error) << bad;
  }
}

TEST(Tower, StructuralConstants) {
  EXPECT_EQ(min_k2(1, 1), 4u);
  EXPECT_EQ(min_k2(2, 4), 6u);
  EXPECT_EQ(min_k2(2, 28), 29u);
  EXPECT_EQ(min_k2(3, 5), 8u);
  EXPECT_EQ(level_relation_length(1, 2), 2u);
  EXPECT_EQ(level_relation_length(2, 3), 1u);
  EXPECT_EQ(level_relation_length(3, 9), 3u);
  EXPECT_EQ(lemma_k(5), 2u);
  EXPECT_EQ(lemma_k(101), 21u);
  Schedule paper;
  paper.paper_mode = true;
  const LevelSpec s = level_spec(paper, 3, 100);
  EXPECT_EQ(s.eps, Ratio::make(1, 12));
  EXPECT_EQ(s.ell, 9u);
  EXPECT_EQ(s.target, Ratio::make(1, 3));
  EXPECT_EQ(s.k2_min, 101u);
}

TEST(Tower, LevelConstructionOrderAndCovering) {
  Stream rng(1, "construction");
  const auto t5 = table_for(5);
  const auto t7 = table_for(7);
  const auto f1 = distinct_gens(*t5, 4, rng);
  const auto h = distinct_gens(*t7, 6, rng);
  const LevelSet l1 = build_base_level(5, f1);
  const LevelSet l2 = build_level(l1, 7, h);
  ASSERT_EQ(l2.elements.size(), 4u * 5u);
  std::size_t pos = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = 0; j < 6; ++j) {
      if (i == j) continue;
      const TupleElement& x = l2.elements[pos++];
      EXPECT_EQ(x.coords[0], f1[i]);
      EXPECT_EQ(x.coords[1], mul(mul(h[i], h[j]), inv(h[i])));
    }
  }
  EXPECT_EQ(verify_covering(l1, nullptr), 0u);
  EXPECT_EQ(verify_covering(l2, &l1), 5u);
  LevelSet broken = l2;
  broken.elements.pop_back();
  try {
    verify_covering(broken, &l1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::CoveringViolation);
  }
  try {
    build_level(l1, 7, std::span(h).first(3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::TooFewGenerators);
  }
}

TEST(Tower, LevelBoundsArithmetic) {
  namespace bmp = boost::multiprecision;
  const double b = 0.6727624241;
  const LevelBounds lb = level_bounds(2, 8, b, Ratio::make(1, 1));
  const bmp::cpp_rational br(b);
  EXPECT_GE(bmp::cpp_rational(lb.derived_bound), 2 * br + bmp::cpp_rational(1, 4));
  EXPECT_GE(bmp::cpp_rational(lb.sharp_bound), (8 * br + 1) / 7);
  EXPECT_NEAR(lb.derived_bound, 2 * b + 0.25, 1e-15);
  EXPECT_NEAR(lb.sharp_bound, (8 * b + 1) / 7, 1e-15);
  EXPECT_EQ(lb.level_bound, std::min(lb.derived_bound, lb.sharp_bound));
  EXPECT_TRUE(lb.target_met);
  EXPECT_FALSE(level_bounds(2, 8, b, Ratio::make(1, 2)).target_met);
  const LevelBounds base = level_bounds(1, 5, 0.8, Ratio::make(1, 1));
  EXPECT_EQ(base.level_bound, 0.8);
}

// ||pi(F_n)|| <= (k2 b + 1)/(k2 - 1) for any base set, checked against a dense oracle, and the
// power-iteration direct mode against the same oracle.
TEST(Tower, DirectNormAgainstDenseOracleAndBound) {
  Stream rng(2, "direct");
  const auto t2 = table_for(2);
  const auto t3 = table_for(3);
  for (int trial = 0; trial < 4; ++trial) {
    const auto f1 = distinct_gens(*t2, 3, rng);
    const auto h = distinct_gens(*t3, 5 + static_cast<std::uint32_t>(trial), rng);
    const LevelSet l1 = build_base_level(2, f1);
    const LevelSet l2 = build_level(l1, 3, h);
    const std::vector<std::uint32_t> primes{2, 3};
    const double exact = oracle_level_norm(l2, primes);
    TowerOptions opts;
    opts.direct_power.tol = 1e-13;
    opts.direct_power.max_iter = 100000;
    const NormEstimate est = direct_level_norm(l2, primes, opts, 5);
    EXPECT_LE(est.lower_bound, exact + 1e-12);
    EXPECT_NEAR(est.lower_bound, exact, 1e-6);
    const double b = oracle_base_norm(*t3, h);
    const double k2 = static_cast<double>(h.size());
    EXPECT_LE(exact, (k2 * b + 1) / (k2 - 1) + 1e-12);
  }
}

TEST(Tower, GenerationRecordsMatchNaiveClosure) {
  Stream rng(3, "generation");
  const auto t = table_for(5);
  const auto h = distinct_gens(*t, 6, rng);
  const auto recs = generation_records(*t, h, 4, 200);
  ASSERT_EQ(recs.size(), 4u);
  for (std::uint32_t i = 0; i < 4; ++i) {
    std::vector<PglElement> hi;
    for (std::size_t s = 0; s < h.size(); ++s)
      for (std::size_t u = 0; u < h.size(); ++u)
        if (s != i && u != i) hi.push_back(mul(h[s], inv(h[u])));
    EXPECT_EQ(recs[i].index, i);
    EXPECT_EQ(recs[i].closure, naive_closure(hi));
    EXPECT_EQ(recs[i].generates, recs[i].closure == 120);
    EXPECT_TRUE(recs[i].dense_norm.has_value());
  }
  const auto base = generation_records(*t, h, 0, 200);
  ASSERT_EQ(base.size(), 1u);
  EXPECT_EQ(base[0].closure, naive_closure(h));
}

TEST(Tower, SearchIsDeterministicAndExhaustsHonestly) {
  LevelSpec spec;
  const auto a = propose_base_set(spec, 1, TowerOptions{}, 7);
  const auto b = propose_base_set(spec, 1, TowerOptions{}, 7);
  EXPECT_EQ(a.gens, b.gens);
  EXPECT_EQ(a.history, b.history);
  EXPECT_EQ(a.history.back().outcome, "accepted");
  EXPECT_GE(a.gens.size(), 4u);
  EXPECT_EQ(a.gap.verdict, GapVerdict::certified);
  LevelSpec hopeless;
  hopeless.eps = Ratio::make(1, 100);
  hopeless.p_max = 7;
  hopeless.retry_budget = 2;
  try {
    propose_base_set(hopeless, 1, TowerOptions{}, 7);
    FAIL();
  } catch (const SearchExhaustedError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SearchExhausted);
    EXPECT_FALSE(e.history().empty());
    for (const auto& r : e.history()) EXPECT_NE(r.outcome, "accepted");
  }
}

class DeskTower : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    TowerState s;
    s.seed = 29;
    s.schedule.eps = {Ratio::make(9, 10), Ratio::make(7, 10)};
    s.schedule.ell = {2, 3};
    tower_ = new TowerState(build_tower(s, TowerOptions{}));
  }
  static void TearDownTestSuite() { delete tower_; }
  static TowerState* tower_;
};
TowerState* DeskTower::tower_ = nullptr;

TEST_F(DeskTower, BuildsTwoCertifiedLevels) {
  const TowerState& t = *tower_;
  ASSERT_EQ(t.levels.size(), 2u);
  const auto k2 = t.levels[1].base_gens.size();
  EXPECT_EQ(t.levels[1].elements.size(), t.levels[0].elements.size() * (k2 - 1));
  EXPECT_EQ(t.certificates[1].r, k2 - 1);
  ASSERT_TRUE(t.certificates[1].direct.has_value());
  EXPECT_LE(t.certificates[1].direct->lower_bound, t.certificates[1].bounds.level_bound);
  EXPECT_LE(t.certificates[1].bounds.level_bound, t.certificates[1].bounds.derived_bound);
  for (const auto& g : t.certificates[1].generation) EXPECT_TRUE(g.generates);
  const VerifyReport rep = reverify(t, TowerOptions{});
  EXPECT_TRUE(rep.ok());
}

TEST_F(DeskTower, RebuildIsBitIdentical) {
  TowerState s;
  s.seed = 29;
  s.schedule = tower_->schedule;
  TowerOptions serial;
  serial.parallel = false;
  serial.relations.parallel = false;
  serial.gap.parallel = false;
  serial.direct_power.parallel = false;
  const TowerState again = build_tower(s, serial);
  EXPECT_EQ(io::to_json(again).dump(), io::to_json(*tower_).dump());
}

TEST_F(DeskTower, ExtendLeavesInputUntouched) {
  TowerState one = *tower_;
  one.levels.resize(1);
  one.specs.resize(1);
  one.certificates.resize(1);
  const std::string before = io::to_json(one).dump();
  const TowerState two = extend_tower(one, tower_->specs[1], TowerOptions{});
  EXPECT_EQ(io::to_json(one).dump(), before);
  EXPECT_EQ(io::to_json(two).dump(), io::to_json(*tower_).dump());
}

TEST_F(DeskTower, TamperingIsDetected) {
  auto failing = [](const TowerState& s) {
    std::set<std::string> names;
    for (const auto& c : reverify(s, TowerOptions{}).checks)
      if (!c.ok) names.insert(c.name);
    return names;
  };
  {
    TowerState s = *tower_;
    auto& gap = s.certificates[0].gap;
    if (gap.trace) {
      gap.trace->c_m += "1";
    } else {
      *gap.dense_norm *= 0.5;
    }
    EXPECT_TRUE(failing(s).count("gap"));
  }
  {
    TowerState s = *tower_;
    std::swap(s.levels[1].elements[0], s.levels[1].elements[1]);
    EXPECT_TRUE(failing(s).count("construction"));
  }
  {
    TowerState s = *tower_;
    s.certificates[1].bounds.level_bound *= 0.5;
    const auto f = failing(s);
    EXPECT_TRUE(f.count("bounds"));
  }
  {
    TowerState s = *tower_;
    s.levels[1].base_gens[0] = s.levels[1].base_gens[1];
    EXPECT_FALSE(failing(s).empty());
  }
}
