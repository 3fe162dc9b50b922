#pragma once

// Averaging operators pi(g_1..g_k) = (1/k) sum_j lambda(g_j) on l^2(G) and their norms on the
// complement of the invariant functions. The regular representation contains every
// irreducible with multiplicity equal to its dimension, so the norm on l^2(G) minus the
// constants is the maximum of ||pi(g_1..g_k)|| over all nontrivial irreducibles pi. No
// irreducible representation is ever constructed.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pglfree/kernels.hpp"
#include "pglfree/pgl.hpp"
#include "pglfree/rng.hpp"

namespace pglfree {

/// Left-regular averaging operator T = (1/k) sum_f lambda(f) on a finite group of order
/// `dimension()`, with the invariant subspace given by constants on consecutive blocks of
/// length `block()`. For a single group the block is the whole group.
class AveragingOperator {
 public:
  AveragingOperator(const GroupTable& table, std::span<const PglElement> gens);
  /// push.row(f)[x] = index(f x), pull.row(f)[x] = index(f^-1 x).
  AveragingOperator(PermutationSet push, PermutationSet pull, std::uint64_t block);

  std::uint64_t dimension() const noexcept { return push_.size; }
  std::uint32_t generator_count() const noexcept { return push_.count; }
  std::uint64_t block() const noexcept { return block_; }
  const PermutationSet& push() const noexcept { return push_; }
  const PermutationSet& pull() const noexcept { return pull_; }

  /// (T v)(x) = (1/k) sum_f v(f^-1 x)
  void apply(std::span<const double> v, std::span<double> out, bool parallel = true) const;
  /// (T* v)(x) = (1/k) sum_f v(f x)
  void apply_adjoint(std::span<const double> v, std::span<double> out, bool parallel = true) const;

 private:
  PermutationSet push_;
  PermutationSet pull_;
  std::uint64_t block_ = 0;
};

struct NormEstimate {
  /// sqrt of the largest Rayleigh quotient of T*T seen; a valid lower bound.
  double lower_bound = 0.0;
  std::optional<double> certified_upper;
  std::uint32_t trace_order = 0;
  std::uint32_t iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

struct PowerOptions {
  /// Stop when ||T*T v - rho v|| <= tol * rho.
  double tol = 1e-11;
  std::uint32_t max_iter = 200000;
  /// Early exit once the lower bound exceeds this value.
  std::optional<double> stop_above;
  bool parallel = true;
};

NormEstimate estimate_norm_power(const AveragingOperator& op, const PowerOptions& opts, Stream& rng);
/// Same iteration from a given start vector (projected first; must not be block-constant).
NormEstimate estimate_norm_power(const AveragingOperator& op, const PowerOptions& opts,
                                 std::span<const double> start);

/// Trace-moment bound ||T_0||^{2m} <= Tr((T*T)^m) - 1 = |G| c_m / k^{2m} - 1, where c_m counts
/// index tuples (i1, j1, ..., im, jm) with g_i1^-1 g_j1 ... g_im^-1 g_jm = e.
struct TraceBound {
  std::uint32_t m = 0;
  std::string c_m;          ///< decimal
  std::string numerator;    ///< |G| c_m - k^{2m}, decimal
  std::string denominator;  ///< k^{2m}, decimal
  /// A double u with u^{2m} >= numerator / denominator verified in exact arithmetic.
  double upper = 0.0;
  /// numerator == 0: the operator vanishes on the complement.
  bool degenerate = false;
};

/// Exact walk count c_m, computed by meeting two half-length convolution powers.
std::string trace_walk_count(const GroupTable& table, std::span<const PglElement> gens, std::uint32_t m,
                             bool parallel = true);
TraceBound certify_norm_trace(const GroupTable& table, std::span<const PglElement> gens, std::uint32_t m,
                              bool parallel = true);
/// Rebuilds the exact rational bound from a recorded c_m (no group arithmetic).
TraceBound trace_bound_from_count(std::uint64_t order, std::uint64_t k, std::uint32_t m, const std::string& c_m);

std::uint32_t default_trace_order(std::uint64_t order, double eps) noexcept;

/// Singular values (descending) of T restricted to the complement of block-constant
/// functions, padded with zeros to the full dimension. Dense; intended for small groups.
std::vector<double> dense_singular_values(const AveragingOperator& op);
double dense_norm(const AveragingOperator& op);

enum class GapVerdict { certified, refuted, inconclusive };
enum class GapMethod { trace, dense, power_refute, automatic };
const char* to_string(GapVerdict v) noexcept;
const char* to_string(GapMethod m) noexcept;
GapVerdict gap_verdict_from_string(const std::string& s);
GapMethod gap_method_from_string(const std::string& s);

inline constexpr std::uint64_t kDefaultDenseLimit = 2184;
/// Added to dense floating-point norms before they are used as upper bounds.
inline constexpr double kDenseMargin = 1e-9;
/// Power-iteration lower bounds must exceed eps by this much to refute.
inline constexpr double kRefuteMargin = 1e-9;

struct GapOptions {
  GapMethod method = GapMethod::automatic;
  /// Fixed trace order; when unset, default_trace_order() and escalation up to max_trace_order.
  std::optional<std::uint32_t> trace_order;
  std::uint32_t max_trace_order = 48;
  std::uint64_t dense_limit = kDefaultDenseLimit;
  PowerOptions power;
  bool parallel = true;
};

struct GapCertificate {
  std::uint32_t p = 0;
  std::vector<PglElement> gens;
  double eps = 0.0;
  GapVerdict verdict = GapVerdict::inconclusive;
  /// Method that produced the verdict: "trace", "dense", "power" or "none".
  std::string method = "none";
  NormEstimate estimate;
  std::optional<TraceBound> trace;
  std::optional<double> dense_norm;
  std::uint64_t seed = 0;

  std::optional<double> certified_upper() const noexcept { return estimate.certified_upper; }
};

GapCertificate certify_gap(const GroupTable& table, std::span<const PglElement> gens, double eps,
                           const GapOptions& opts = {}, std::uint64_t seed = 0);

struct GapRecheck {
  bool ok = false;
  std::string detail;
};
/// Re-derives a recorded verdict without an RNG: trace counts are recomputed exactly, dense
/// norms recomputed; a refutation is re-checked densely up to `dense_limit`, above it by
/// power iteration started from the delta function at the identity. Inconclusive
/// certificates claim nothing and re-check trivially.
GapRecheck recheck_gap(const GapCertificate& cert, std::uint64_t dense_limit = kDefaultDenseLimit,
                       bool parallel = true);

/// Size of the subgroup generated by gens (BFS over left multiplication by gens and inverses).
std::uint64_t closure_size(const GroupTable& table, std::span<const PglElement> gens);
bool check_generation(const GroupTable& table, std::span<const PglElement> gens);

}  // namespace pglfree
