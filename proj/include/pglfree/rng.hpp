#pragma once

#include <cstdint>
#include <string_view>

namespace pglfree {

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// FNV-1a 64-bit hash of a purpose tag.
std::uint64_t hash_tag(std::string_view tag) noexcept;

/// Counter-based 64-bit generator.
///
/// Draw i of a stream with key K is mix64(K + (i + 1) * 0x9E3779B97F4A7C15).
/// A stream key is derived from (seed, tag, a, b, c) by folding each
/// coordinate through mix64:
///
///     K = mix64(mix64(mix64(mix64(seed ^ hash_tag(tag)) ^ a) ^ b) ^ c)
///
/// so every draw is a pure function of the seed, the purpose tag, the
/// coordinates (typically level, attempt, trial) and the draw index. Parallel
/// schedules cannot change any output as long as each task owns its stream.
class Stream {
 public:
  Stream(std::uint64_t seed, std::string_view tag, std::uint64_t a = 0, std::uint64_t b = 0,
         std::uint64_t c = 0) noexcept;

  static Stream from_key(std::uint64_t key) noexcept;

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

  /// Random access to draw `index` without advancing.
  std::uint64_t at(std::uint64_t index) const noexcept;
  std::uint64_t next() noexcept;

  /// Uniform integer in [0, bound), bound > 0 (Lemire's multiply-shift with rejection).
  std::uint64_t below(std::uint64_t bound) noexcept;

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() noexcept;

  /// Independent substream keyed off this stream's key.
  Stream child(std::string_view tag, std::uint64_t a = 0, std::uint64_t b = 0,
               std::uint64_t c = 0) const noexcept;

 private:
  Stream() = default;
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace pglfree
