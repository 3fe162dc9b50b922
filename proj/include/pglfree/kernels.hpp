#pragma once

// Data-parallel inner loops. Every kernel has a serial reference in kernels::serial and an
// OpenMP version in kernels::parallel with bit-identical results: gathers write disjoint
// outputs, integer reductions are exact, and floating-point reductions are summed over
// fixed-size blocks in a fixed order regardless of thread count.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "pglfree/pgl.hpp"
#include "pglfree/words.hpp"

namespace pglfree {

/// `count` permutations of [0, size), row-major.
struct PermutationSet {
  std::uint64_t size = 0;
  std::uint32_t count = 0;
  std::vector<std::uint32_t> data;

  std::span<const std::uint32_t> row(std::uint32_t f) const noexcept {
    return {data.data() + static_cast<std::size_t>(f) * size, static_cast<std::size_t>(size)};
  }
};

struct LiftedCounts {
  /// Tuples of 2x2 matrices (any determinant) where the word evaluates to a scalar matrix.
  std::uint64_t scalar_all = 0;
  /// The same restricted to invertible matrices.
  std::uint64_t scalar_invertible = 0;
};

namespace kernels {

inline constexpr std::size_t kReductionBlock = 4096;

namespace serial {

/// out[x] = (1/count) * sum_f in[perm_f[x]].
void average_gather(const PermutationSet& perms, std::span<const double> in, std::span<double> out);
/// Subtracts the mean of every consecutive block of length `block`; v.size() is a multiple of it.
void subtract_block_means(std::span<double> v, std::uint64_t block);
double dot(std::span<const double> x, std::span<const double> y);

/// next[y] = sum_f weights[f] * cur[perm_f[y]].
template <class Count>
void convolve_counts(std::span<const Count> cur, const PermutationSet& perms, std::span<const std::uint64_t> weights,
                     std::span<Count> next) {
  for (std::uint64_t y = 0; y < perms.size; ++y) {
    Count acc = 0;
    for (std::uint32_t f = 0; f < perms.count; ++f) {
      acc += Count(weights[f]) * cur[perms.data[static_cast<std::size_t>(f) * perms.size + y]];
    }
    next[y] = acc;
  }
}

/// #{g in PGL2^k : w(g) = e}, exhaustive.
std::uint64_t count_word_solutions(const GroupTable& table, const ReducedWord& w, std::uint32_t k);
/// Exhaustive count over (F_p^{2x2})^k with adjugates standing in for inverses.
LiftedCounts count_lifted(std::uint32_t p, const ReducedWord& w, std::uint32_t k);

}  // namespace serial

namespace parallel {

void average_gather(const PermutationSet& perms, std::span<const double> in, std::span<double> out);
void subtract_block_means(std::span<double> v, std::uint64_t block);
double dot(std::span<const double> x, std::span<const double> y);

template <class Count>
void convolve_counts(std::span<const Count> cur, const PermutationSet& perms, std::span<const std::uint64_t> weights,
                     std::span<Count> next) {
  const auto n = static_cast<std::int64_t>(perms.size);
#pragma omp parallel for schedule(static)
  for (std::int64_t y = 0; y < n; ++y) {
    Count acc = 0;
    for (std::uint32_t f = 0; f < perms.count; ++f) {
      acc += Count(weights[f]) * cur[perms.data[static_cast<std::size_t>(f) * perms.size + static_cast<std::size_t>(y)]];
    }
    next[static_cast<std::size_t>(y)] = acc;
  }
}

std::uint64_t count_word_solutions(const GroupTable& table, const ReducedWord& w, std::uint32_t k);
LiftedCounts count_lifted(std::uint32_t p, const ReducedWord& w, std::uint32_t k);

}  // namespace parallel

/// Current OpenMP thread budget (1 when built without OpenMP).
int thread_count() noexcept;
void set_thread_count(int n) noexcept;

}  // namespace kernels
}  // namespace pglfree
