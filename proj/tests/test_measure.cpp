#include <gtest/gtest.h>

#include <map>

#include "pglfree/measure.hpp"

using namespace pglfree;

namespace {

const TowerState& desk_tower() {
  static const TowerState t = [] {
    TowerState s;
    s.seed = 29;
    s.schedule.eps = {Ratio::make(9, 10), Ratio::make(7, 10)};
    s.schedule.ell = {2, 3};
    return build_tower(s, TowerOptions{});
  }();
  return t;
}

}  // namespace

TEST(Measure, MarginalsAreConsistentInExactArithmetic) {
  const TowerMeasure m{&desk_tower(), false};
  EXPECT_TRUE(marginal_consistency(m, 1));
  EXPECT_TRUE(marginal_consistency(m, 2));
  EXPECT_NO_THROW(require_marginal_consistency(m, 2));

  TowerState broken = desk_tower();
  broken.levels[1].elements.pop_back();
  const TowerMeasure bm{&broken, false};
  EXPECT_FALSE(marginal_consistency(bm, 2));
  try {
    require_marginal_consistency(bm, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InconsistentCovering);
  }
}

TEST(Measure, PushForwardRecoversPreviousMarginal) {
  const TowerMeasure m{&desk_tower(), false};
  const auto s1 = support_descriptor(m, 1);
  const auto s2 = support_descriptor(m, 2);
  Rational total = 0;
  for (const auto& sp : s2) total += sp.mass;
  EXPECT_EQ(total, Rational(1));

  // independent marginal: count every listed element of F_1
  std::map<TupleElement, Rational> oracle;
  const auto& f1 = desk_tower().levels[0].elements;
  for (const auto& x : f1) oracle[x] += Rational(1, f1.size());
  const auto pushed = push_forward(s2, 1);
  ASSERT_EQ(pushed.size(), oracle.size());
  ASSERT_EQ(s1.size(), oracle.size());
  for (std::size_t i = 0; i < pushed.size(); ++i) {
    EXPECT_EQ(pushed[i].mass, oracle.at(pushed[i].point));
    EXPECT_EQ(s1[i].point, pushed[i].point);
    EXPECT_EQ(s1[i].mass, pushed[i].mass);
  }
}

TEST(Measure, MaxMassHalvesAndMeasureIsNonAtomic) {
  const TowerMeasure m{&desk_tower(), false};
  const NonAtomicReport rep = non_atomic_check(m);
  EXPECT_TRUE(rep.non_atomic);
  ASSERT_EQ(rep.max_mass.size(), 2u);
  ASSERT_EQ(rep.fibres.size(), 1u);
  EXPECT_GE(rep.fibres[0], 2u);
  EXPECT_LE(rep.max_mass[1] * 2, rep.max_mass[0]);
  EXPECT_EQ(rep.max_mass[1], rep.max_mass[0] / rep.fibres[0]);
}

TEST(Measure, SymmetrizationIsSelfAdjoint) {
  const TowerMeasure m{&desk_tower(), false};
  const TowerMeasure s = symmetrize(m);
  EXPECT_TRUE(s.symmetrized);
  EXPECT_TRUE(symmetrize(s).symmetrized);
  EXPECT_TRUE(self_adjoint_check(s, 1));
  EXPECT_TRUE(self_adjoint_check(s, 2));
  const auto sup = support_descriptor(s, 2);
  Rational total = 0;
  for (const auto& sp : sup) total += sp.mass;
  EXPECT_EQ(total, Rational(1));
  // the symmetrized weight of a point equals that of its inverse
  std::map<TupleElement, Rational> w;
  for (const auto& sp : sup) w[sp.point] = sp.mass;
  for (const auto& sp : sup) EXPECT_EQ(w.at(tuple_inv(sp.point)), sp.mass);
  try {
    self_adjoint_check(s, 2, 1000);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::TooLarge);
  }
}

TEST(Measure, ProfileEchoesCertificates) {
  const TowerState& t = desk_tower();
  const C0Profile prof = c0_profile(TowerMeasure{&t, false});
  ASSERT_EQ(prof.rows.size(), 2u);
  EXPECT_FALSE(prof.paper_mode);
  for (std::size_t i = 0; i < 2; ++i) {
    const C0Row& r = prof.rows[i];
    EXPECT_EQ(r.n, i + 1);
    EXPECT_EQ(r.p, t.levels[i].p);
    EXPECT_EQ(r.eps, t.specs[i].eps);
    EXPECT_EQ(r.base_bound, *t.certificates[i].gap.certified_upper());
    EXPECT_EQ(r.level_bound, t.certificates[i].bounds.level_bound);
    EXPECT_EQ(r.target, t.specs[i].target);
    EXPECT_TRUE(r.verdict);
  }
  const std::string table = profile_table(prof);
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 3);

  TowerState missing = t;
  missing.certificates[1].gap.verdict = GapVerdict::inconclusive;
  missing.certificates[1].gap.estimate.certified_upper.reset();
  try {
    c0_profile(TowerMeasure{&missing, false});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MissingCertificate);
  }
}
