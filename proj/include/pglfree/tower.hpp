#pragma once

// Inductive tower F_n in K_n = prod_{j<=n} PGL2(Z/p_jZ).
//
// Level 1 is a base set F_1 = {h_1..h_k} in Gamma_{p_1} (as 1-tuples). Level n >= 2 takes
// F_{n-1} = {g_1..g_{k1}} and a base set F = {h_1..h_{k2}} in Gamma_{p_n} and forms
//
//     F_n = {(g_i, h_i h_j h_i^-1) : i < k1, j < k2, i != j}
//
// in the serialized (i-major, then j) order. Every irreducible of K_n that does not factor
// through the projection to K_{n-1} is pi_1 (x) pi_2 with pi_2 nontrivial on Gamma_{p_n}, and
//
//     pi(F_n) = (1/k1) sum_i pi_1(g_i) (x) pi_2(h_i) T_i pi_2(h_i)^*,
//     T_i = (k2 pi_2(F) - pi_2(h_i)) / (k2 - 1),
//
// so ||pi(F_n)|| <= (k2 b + 1) / (k2 - 1) <= 2 b + 1/(2n) once k2 > 2n + 1, where b is a
// certified bound for ||pi_2(F)||. In direct mode the averaging operator of F_n is applied on
// l^2(K_n) restricted to functions with zero mean on every fibre of the projection; those
// are exactly the isotypic components of irreducibles not factoring through it.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pglfree/error.hpp"
#include "pglfree/group_ops.hpp"
#include "pglfree/pgl.hpp"
#include "pglfree/spectral.hpp"
#include "pglfree/words.hpp"

namespace pglfree {

/// Nonnegative rational with 64-bit parts, always reduced.
struct Ratio {
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  static Ratio make(std::uint64_t num, std::uint64_t den);
  /// Accepts "a/b", integers, or finite decimals such as "0.9".
  static Ratio parse(std::string_view text);
  double value() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }
  std::string to_string() const;

  friend bool operator==(const Ratio&, const Ratio&) = default;
};
bool operator<(const Ratio& x, const Ratio& y) noexcept;

struct LevelSpec {
  std::uint32_t n = 1;
  std::uint32_t p_min = 5;
  /// Largest prime the walk may reach.
  std::uint32_t p_max = 13;
  Ratio eps = Ratio::make(9, 10);
  /// Relation length certified for the base set.
  std::uint32_t ell = 2;
  std::uint32_t k2_min = 4;
  /// Number of increments of k2 tried at one prime before advancing.
  std::uint32_t k_growth = 2;
  std::uint32_t retry_budget = 8;
  bool paper_mode = false;
  /// Required bound for ||pi(F_n)|| on irreducibles not factoring through level n-1.
  Ratio target = Ratio::make(1, 1);

  friend bool operator==(const LevelSpec&, const LevelSpec&) = default;
};

/// max{2n+1, k1} + 1 (k1 = 1 at the base level).
std::uint32_t min_k2(std::uint32_t n, std::uint64_t k1) noexcept;
/// Length certified for F_n itself: a relation of that length projects to one of length
/// <= 3x on the base set. For n = 1 this is ell.
std::uint32_t level_relation_length(std::uint32_t n, std::uint32_t ell) noexcept;
/// floor((ln p)^2)
std::uint32_t lemma_k(std::uint32_t p) noexcept;

struct Schedule {
  bool paper_mode = false;
  std::vector<Ratio> eps;
  std::vector<std::uint32_t> ell;
  std::uint32_t p_min = 5;
  std::uint32_t p_max = 13;
  std::uint32_t retry_budget = 8;
  std::uint32_t k_growth = 2;
  /// Desk-mode target; paper mode always uses 1/n.
  Ratio target = Ratio::make(1, 1);
  std::uint32_t k2_min = 0;

  std::uint32_t levels() const noexcept { return static_cast<std::uint32_t>(eps.size()); }

  friend bool operator==(const Schedule&, const Schedule&) = default;
};

/// Spec for level n given k1 = |F_{n-1}|. Paper mode: eps = 1/(4n), ell = 3n, target 1/n.
LevelSpec level_spec(const Schedule& schedule, std::uint32_t n, std::uint64_t k1);

struct TowerOptions {
  GapOptions gap;
  RelationOptions relations;
  /// Run the direct check when |K_n| is at most this.
  std::uint64_t direct_limit = 100'000;
  bool direct = true;
  /// Dense ||R_i|| alongside the closure checks when |Gamma_p| is at most this.
  std::uint64_t generation_dense_limit = 1320;
  PowerOptions direct_power{1e-10, 4000, std::nullopt, true};
  bool parallel = true;
};

struct AttemptRecord {
  std::uint32_t p = 0;
  std::uint32_t k = 0;
  std::uint32_t attempt = 0;
  /// accepted, relation, relation-budget, gap-refuted, gap-inconclusive, generation, target-missed
  std::string outcome;
  std::string detail;

  friend bool operator==(const AttemptRecord&, const AttemptRecord&) = default;
};

class SearchExhaustedError : public Error {
 public:
  SearchExhaustedError(const std::string& what, std::vector<AttemptRecord> history)
      : Error(ErrorKind::SearchExhausted, what), history_(std::move(history)) {}
  const std::vector<AttemptRecord>& history() const noexcept { return history_; }

 private:
  std::vector<AttemptRecord> history_;
};

struct GenerationRecord {
  /// Index i of the excluded base element; for the base level the whole set (index 0).
  std::uint32_t index = 0;
  std::uint64_t closure = 0;
  bool generates = false;
  /// ||R_i|| on the complement of constants, when the dense oracle ran.
  std::optional<double> dense_norm;

  friend bool operator==(const GenerationRecord&, const GenerationRecord&) = default;
};

struct BaseSetResult {
  std::uint32_t p = 0;
  std::vector<PglElement> gens;
  GapCertificate gap;
  RelationReport relations;
  std::vector<GenerationRecord> generation;
  std::vector<AttemptRecord> history;
};

struct LemmaQuery {
  double eps = 0.5;
  std::uint32_t k0 = 2;
  std::uint32_t p0 = 5;
  std::uint32_t ell = 2;
  std::uint32_t p_max = 13;
  std::uint32_t retry_budget = 8;
  std::uint32_t k_growth = 2;
};

/// Walks primes p >= p0 with k = max(k0, floor((ln p)^2)) + growth, sampling distinct
/// k-subsets until one generates, has no relation of length <= ell, and certifies the gap.
/// Throws SearchExhaustedError.
BaseSetResult lemma_search(const LemmaQuery& q, const TowerOptions& opts, std::uint64_t seed);

/// Base set for level spec.n over a previous level of size k1 (k1 = 1 at the base).
/// Order of the search: retries, then k2, then p. Throws SearchExhaustedError.
BaseSetResult propose_base_set(const LevelSpec& spec, std::uint64_t k1, const TowerOptions& opts,
                               std::uint64_t seed);

struct LevelSet {
  std::uint32_t n = 0;
  std::uint32_t p = 0;
  std::vector<TupleElement> elements;
  std::vector<PglElement> base_gens;

  friend bool operator==(const LevelSet&, const LevelSet&) = default;
};

LevelSet build_base_level(std::uint32_t p, std::span<const PglElement> base);
/// Throws TooFewGenerators when k2 < max(k1, 3).
LevelSet build_level(const LevelSet& prev, std::uint32_t p, std::span<const PglElement> base);

/// Fibre size r_n of the projection F_n -> F_{n-1}; 0 for the base level (prev == nullptr).
/// Throws CoveringViolation naming the offending fibre.
std::uint32_t verify_covering(const LevelSet& level, const LevelSet* prev);

struct LevelBounds {
  /// 2b + 1/(2n)
  double derived_bound = 0.0;
  /// (k2 b + 1)/(k2 - 1)
  double sharp_bound = 0.0;
  /// min of the two (n >= 2), b itself at the base level.
  double level_bound = 0.0;
  bool target_met = false;
};

/// Bound-mode arithmetic from a certified base-set bound b.
LevelBounds level_bounds(std::uint32_t n, std::uint32_t k2, double b, const Ratio& target);

/// Averaging operator of F_n on l^2(K_n), fibres of the last coordinate as blocks.
/// Throws TooLarge when |K_n| exceeds `limit`.
AveragingOperator level_operator(std::span<const TupleElement> elements, std::span<const std::uint32_t> primes,
                                 std::uint64_t limit);
/// Power-iteration norm of the F_n operator on l^2(K_n) minus fibre-constant functions.
NormEstimate direct_level_norm(const LevelSet& level, std::span<const std::uint32_t> primes, const TowerOptions& opts,
                               std::uint64_t seed);

RelationReport verify_level_relations(const LevelSet& level, std::span<const std::uint32_t> primes, std::uint32_t ell,
                                      const RelationOptions& opts = {});

/// Closure of H_i = {h_s h_t^-1 : s, t != i} for i < k1 (k1 = 0: the base set itself), with
/// dense ||R_i|| when |Gamma_p| <= dense_limit.
std::vector<GenerationRecord> generation_records(const GroupTable& table, std::span<const PglElement> base,
                                                 std::uint64_t k1, std::uint64_t dense_limit);
/// Throws GenerationFailure on the first failing i.
std::vector<GenerationRecord> verify_generation(const GroupTable& table, std::span<const PglElement> base,
                                                std::uint64_t k1, std::uint64_t dense_limit);

struct LevelCertificate {
  std::uint32_t r = 0;
  GapCertificate gap;
  RelationReport base_relations;
  std::uint32_t relation_length = 0;
  RelationReport relations;
  std::vector<GenerationRecord> generation;
  LevelBounds bounds;
  /// "bound" or "direct"
  std::string mode = "bound";
  std::optional<NormEstimate> direct;
  std::vector<AttemptRecord> history;
};

struct TowerState {
  std::uint64_t seed = 0;
  Schedule schedule;
  std::vector<LevelSpec> specs;
  std::vector<LevelSet> levels;
  std::vector<LevelCertificate> certificates;

  std::vector<std::uint32_t> primes() const;
};

/// Appends one certified level. The input is untouched; on failure the exception carries
/// the retry history.
TowerState extend_tower(const TowerState& state, const LevelSpec& spec, const TowerOptions& opts);
/// Extends until schedule.levels() levels exist.
TowerState build_tower(TowerState state, const TowerOptions& opts);

struct VerifyCheck {
  std::uint32_t level = 0;
  std::string name;
  bool ok = false;
  std::string detail;
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;
  bool ok() const noexcept;
};

/// Re-checks every stored fact deterministically: construction, covering, projection
/// compatibility, relation reports, generation, gap certificates (trace counts recomputed
/// exactly, dense norms recomputed) and the level bounds. Never uses an RNG.
VerifyReport reverify(const TowerState& state, const TowerOptions& opts);

}  // namespace pglfree
