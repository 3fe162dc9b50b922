#pragma once

// Sampling experiments and exhaustive counts behind the two probabilistic estimates used to
// find base sets: random k-tuples of Gamma_p have a spectral gap with probability at least
// 1 - 4|G| exp(-k eps^2 / (16 ln 2)), and satisfy no relation of length <= ell with
// probability at least 1 - (2k)^{ell+1} 3 ell / p once 3k <= p - 1 and Gamma_p has no law of
// length <= ell. The second rests on P(w = e) <= (ell/p)(1 + 1/(p-1))^{3k} for every
// non-law w, which is checked here exhaustively on small groups.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "pglfree/spectral.hpp"
#include "pglfree/words.hpp"

namespace pglfree {

enum class BoundFormula { alon_roichman, girth, est_l };
const char* to_string(BoundFormula f) noexcept;

struct TrialConfig {
  std::uint32_t p = 5;
  std::uint32_t k = 10;
  double eps = 0.8;
  std::uint32_t ell = 2;
  std::uint32_t trials = 100;
  std::uint64_t seed = 0;
};

struct TrialResult {
  TrialConfig config;
  std::uint32_t successes = 0;
  /// 1 per successful trial, in trial order.
  std::vector<std::uint8_t> outcomes;
  double theoretical_bound = 0.0;
  BoundFormula formula = BoundFormula::alon_roichman;
  /// Bound <= 0.
  bool vacuous = false;
  /// Preconditions of the bound hold (girth: 3k <= p - 1 and law screening passed).
  bool applicable = true;
  /// Trials with an inconclusive verdict (counted as failures).
  std::uint32_t inconclusive = 0;

  double fraction() const noexcept {
    return config.trials ? static_cast<double>(successes) / config.trials : 0.0;
  }
};

/// 1 - 4|G| exp(-k eps^2 / (16 ln 2))
double alon_roichman_bound(std::uint64_t order, std::uint32_t k, double eps) noexcept;
/// 1 - (2k)^{ell+1} 3 ell / p
double girth_bound(std::uint32_t p, std::uint32_t k, std::uint32_t ell) noexcept;

/// k independent uniform draws (repeats allowed) from the stream of trial t.
std::vector<PglElement> sample_tuple(const GroupTable& table, std::uint32_t k, std::uint64_t seed,
                                     std::string_view tag, std::uint32_t trial);

/// Success = certified gap at eps.
TrialResult ar_trials(const TrialConfig& cfg, const GapOptions& gap = {});

struct LawScreen {
  bool passed = false;
  std::uint64_t words = 0;
  /// A word with no non-vanishing substitution found, when screening failed.
  std::optional<ReducedWord> suspect;
};
/// Looks for a non-vanishing substitution for every reduced word of length <= ell over k
/// symbols (random substitutions first, exhaustive fallback within budget).
LawScreen screen_laws(std::uint32_t p, std::uint32_t k, std::uint32_t ell, std::uint64_t seed,
                      std::uint64_t exhaustive_budget = 1'000'000);

/// Success = no relation of length <= ell.
TrialResult girth_trials(const TrialConfig& cfg, const RelationOptions& opts = {});

struct DecompositionCheck {
  /// max |lambda_0 - (T - iS)| entrywise
  double residual = 0.0;
  double t_norm = 0.0;
  double s_norm = 0.0;
  double norm = 0.0;
  /// extreme eigenvalues of the X_j over all j
  double x_min = 0.0;
  double x_max = 0.0;
  bool ok = false;
};
/// Dense check of lambda_0(g) = T - iS, 0 <= X_j <= 1 and ||lambda_0(g)|| <= ||T|| + ||S||
/// on l^2(G) minus constants. Throws TooLarge above `limit`.
DecompositionCheck ts_decomposition_check(const GroupTable& table, std::span<const PglElement> gens,
                                          std::uint64_t limit = 400);

using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::multiprecision::cpp_rational;

struct LiftedCount {
  /// |W|: matrix tuples where the word is scalar
  BigInt w;
  /// |V| = |W| restricted to invertible matrices
  BigInt v;
};

struct ExactCount {
  ReducedWord word;
  std::uint32_t p = 0;
  std::uint32_t k = 0;
  BigInt count_u{};
  BigInt total{};
  /// (ell/p)(1 + 1/(p-1))^{3k}
  BigRational est_bound{};
  /// ell (p-1)^{-k} p^{4k-1}
  BigRational u_bound{};
  bool is_law = false;
  std::optional<LiftedCount> lifted{};
  /// Bound assertions (skipped, i.e. true, for laws).
  bool u_bound_ok = false;
  bool est_ok = false;
  bool covering_ok = true;
  bool w_bound_ok = true;
};

struct CountBudget {
  std::uint64_t tuples = 1'000'000;
  std::uint64_t lifted = 10'000'000;
  bool lift = true;
  bool parallel = true;
};

/// Exhaustive |U| = #{g in Gamma_p^k : w(g) = e}; throws BudgetExceeded.
ExactCount exact_word_count(const ReducedWord& w, std::uint32_t p, std::uint32_t k, const CountBudget& budget = {});
/// True iff w vanishes on all of Gamma_p^{symbols}; throws BudgetExceeded.
bool law_check(const ReducedWord& w, std::uint32_t p, std::uint64_t budget = 1'000'000);

/// All reduced words with letters among the first k generators and length in [1, max_len].
std::vector<ReducedWord> all_reduced_words(std::uint32_t k, std::uint32_t max_len);

/// Tab-separated row: formula, p, k, eps, ell, trials, seed, successes, fraction, bound, flags.
std::string trial_row(const TrialResult& r);
std::string trial_header();

}  // namespace pglfree
