#pragma once

// The measure nu_0 on K = prod_n Gamma_{p_n} is determined by its marginals: the push-forward
// to K_n is the normalized counting measure on F_n. It exists because every projection
// F_n -> F_{n-1} is a covering with constant fibre size, and it is never materialized beyond
// the built levels. The symmetrization nu(U) = (nu_0(U) + nu_0(U^-1))/2 puts mass
// (w(x) + w(x^-1))/2 on F_n u F_n^-1.

#include <cstdint>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "pglfree/tower.hpp"

namespace pglfree {

using Rational = boost::multiprecision::cpp_rational;

struct TowerMeasure {
  const TowerState* tower = nullptr;
  bool symmetrized = false;
};

/// Idempotent.
TowerMeasure symmetrize(TowerMeasure m) noexcept;

/// r_n / |F_n| == 1 / |F_{n-1}| on every fibre, in exact rationals. Vacuously true at n = 1.
bool marginal_consistency(const TowerMeasure& m, std::uint32_t n);
/// Throws InconsistentCovering where marginal_consistency() is false.
void require_marginal_consistency(const TowerMeasure& m, std::uint32_t n);

struct NonAtomicReport {
  bool non_atomic = false;
  /// Largest point mass of nu_0 at each level (1/|F_n|).
  std::vector<Rational> max_mass;
  /// Fibre sizes r_n for n >= 2.
  std::vector<std::uint32_t> fibres;
};
NonAtomicReport non_atomic_check(const TowerMeasure& m);

struct SupportPoint {
  TupleElement point;
  Rational mass;
};
/// Points of the level-n marginal with exact masses, sorted by point.
std::vector<SupportPoint> support_descriptor(const TowerMeasure& m, std::uint32_t n);
/// Image under the projection onto the first `width` coordinates, masses summed over fibres.
std::vector<SupportPoint> push_forward(const std::vector<SupportPoint>& support, std::size_t width);

/// Whether the matrix of sum_x mass(x) lambda(x) on l^2(K_n) equals its transpose, compared
/// entry by entry in exact integer weights. Throws TooLarge when |K_n| > limit.
bool self_adjoint_check(const TowerMeasure& m, std::uint32_t n, std::uint64_t limit = 100'000);

struct C0Row {
  std::uint32_t n = 0;
  std::uint32_t p = 0;
  /// Threshold attested by the base-set gap certificate.
  Ratio eps;
  /// Numerical value of the certified upper bound on Gamma_{p_n}.
  double base_bound = 0.0;
  /// Bound on ||pi(nu_0)|| for irreducibles factoring through level n but not n - 1.
  double level_bound = 0.0;
  Ratio target;
  bool verdict = false;
};

struct C0Profile {
  bool paper_mode = false;
  std::vector<C0Row> rows;
};

/// Throws MissingCertificate when a level has no certified gap.
C0Profile c0_profile(const TowerMeasure& m);
/// Tab-separated table with a header line.
std::string profile_table(const C0Profile& profile);

}  // namespace pglfree
