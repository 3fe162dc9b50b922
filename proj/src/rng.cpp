#include "pglfree/rng.hpp"

namespace pglfree {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t derive_key(std::uint64_t base, std::uint64_t tag, std::uint64_t a, std::uint64_t b,
                         std::uint64_t c) noexcept {
  std::uint64_t k = mix64(base ^ tag);
  k = mix64(k ^ a);
  k = mix64(k ^ b);
  return mix64(k ^ c);
}
}  // namespace

std::uint64_t mix64(std::uint64_t x) noexcept {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

std::uint64_t hash_tag(std::string_view tag) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char ch : tag) {
    h ^= ch;
    h *= 0x100000001B3ULL;
  }
  return h;
}

Stream::Stream(std::uint64_t seed, std::string_view tag, std::uint64_t a, std::uint64_t b,
               std::uint64_t c) noexcept
    : key_(derive_key(seed, hash_tag(tag), a, b, c)) {}

Stream Stream::from_key(std::uint64_t key) noexcept {
  Stream s;
  s.key_ = key;
  return s;
}

std::uint64_t Stream::at(std::uint64_t index) const noexcept {
  return mix64(key_ + (index + 1) * kGolden);
}

std::uint64_t Stream::next() noexcept { return at(counter_++); }

std::uint64_t Stream::below(std::uint64_t bound) noexcept {
  // Lemire 2019: reject the low-product values that would bias the result.
  unsigned __int128 m = static_cast<unsigned __int128>(next()) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(next()) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

double Stream::uniform01() noexcept {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

Stream Stream::child(std::string_view tag, std::uint64_t a, std::uint64_t b,
                     std::uint64_t c) const noexcept {
  return from_key(derive_key(key_, hash_tag(tag), a, b, c));
}

}  // namespace pglfree
