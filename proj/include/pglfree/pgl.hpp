#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "pglfree/rng.hpp"

namespace pglfree {

bool is_prime(std::uint64_t n) noexcept;

/// Arithmetic in Z/pZ. Operands are expected to be reduced; p < 2^31.
namespace fp {
inline std::uint32_t add(std::uint32_t x, std::uint32_t y, std::uint32_t p) noexcept {
  const std::uint64_t s = std::uint64_t{x} + y;
  return static_cast<std::uint32_t>(s >= p ? s - p : s);
}
inline std::uint32_t sub(std::uint32_t x, std::uint32_t y, std::uint32_t p) noexcept {
  return x >= y ? x - y : x + (p - y);
}
inline std::uint32_t neg(std::uint32_t x, std::uint32_t p) noexcept { return x == 0 ? 0 : p - x; }
inline std::uint32_t mul(std::uint32_t x, std::uint32_t y, std::uint32_t p) noexcept {
  return static_cast<std::uint32_t>((std::uint64_t{x} * y) % p);
}
/// Multiplicative inverse of a nonzero residue (extended Euclid).
std::uint32_t inv(std::uint32_t x, std::uint32_t p) noexcept;
/// Reduce any signed integer into [0, p).
std::uint32_t reduce(std::int64_t x, std::uint32_t p) noexcept;
}  // namespace fp

/// An element of Z/pZ with its modulus attached.
struct FpScalar {
  std::uint32_t value = 0;
  std::uint32_t modulus = 0;

  friend bool operator==(const FpScalar&, const FpScalar&) = default;
};

/// Row-major 2x2 matrix over Z/pZ.
struct Mat2 {
  std::uint32_t p = 0;
  std::uint32_t a = 0, b = 0, c = 0, d = 0;

  /// Entries are reduced mod p.
  static Mat2 make(std::uint32_t p, std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t d);

  std::uint32_t det() const noexcept;
  Mat2 operator*(const Mat2& o) const noexcept;
  /// Classical adjoint [[d, -b], [-c, a]]; equals det * inverse.
  Mat2 adjugate() const noexcept;
  Mat2 scaled(std::uint32_t s) const noexcept;
  bool is_scalar() const noexcept { return b == 0 && c == 0 && a == d; }

  friend bool operator==(const Mat2&, const Mat2&) = default;
};

/// Number of bytes in the canonical encoding: five little-endian u32 words (p, a, b, c, d).
inline constexpr std::size_t kEncodedSize = 20;
using Encoding = std::array<std::uint8_t, kEncodedSize>;

/// A projective class in PGL2(Z/pZ), stored by its canonical representative:
/// the first nonzero entry (row-major) is 1.
class PglElement {
 public:
  PglElement() = default;

  std::uint32_t modulus() const noexcept { return m_.p; }
  std::uint32_t a() const noexcept { return m_.a; }
  std::uint32_t b() const noexcept { return m_.b; }
  std::uint32_t c() const noexcept { return m_.c; }
  std::uint32_t d() const noexcept { return m_.d; }
  const Mat2& matrix() const noexcept { return m_; }
  bool valid() const noexcept { return m_.p != 0; }
  bool is_identity() const noexcept { return m_.b == 0 && m_.c == 0 && m_.a == 1 && m_.d == 1; }

  Encoding encode() const noexcept;
  /// Throws Format on a non-canonical, singular, or non-prime encoding.
  static PglElement decode(std::span<const std::uint8_t> bytes);

  std::string to_string() const;

  friend bool operator==(const PglElement& x, const PglElement& y) noexcept {
    return x.m_ == y.m_;
  }
  friend std::strong_ordering operator<=>(const PglElement& x, const PglElement& y) noexcept;

 private:
  friend PglElement canonicalize(const Mat2& m);
  friend class GroupTable;
  explicit PglElement(const Mat2& m) : m_(m) {}
  Mat2 m_{};
};

struct PglHash {
  std::size_t operator()(const PglElement& g) const noexcept;
};

/// Scales m so that its first nonzero row-major entry is 1. Throws SingularMatrix.
PglElement canonicalize(const Mat2& m);
PglElement pgl_identity(std::uint32_t p);
/// Throws ModulusMismatch.
PglElement mul(const PglElement& x, const PglElement& y);
PglElement inv(const PglElement& x) noexcept;

/// |PGL2(Z/pZ)| = (p-1) p (p+1). Throws NotPrime.
std::uint64_t order_formula(std::uint64_t p);

inline constexpr std::uint64_t kDefaultMaxOrder = 2'000'000;

/// Full enumeration of PGL2(Z/pZ) in increasing (a, b, c, d) order of the canonical
/// representatives, with an O(1) closed-form rank. Immutable after construction.
class GroupTable {
 public:
  /// Throws NotPrime, or TooLarge when the order exceeds `max_order`.
  static GroupTable build(std::uint32_t p, std::uint64_t max_order = kDefaultMaxOrder);

  std::uint32_t prime() const noexcept { return p_; }
  std::uint64_t order() const noexcept { return elements_.size(); }
  std::span<const PglElement> elements() const noexcept { return elements_; }
  const PglElement& element(std::uint32_t i) const noexcept { return elements_[i]; }
  std::uint32_t index_of(const PglElement& g) const;
  std::uint32_t identity_index() const noexcept { return identity_; }
  std::uint32_t mul_index(std::uint32_t i, std::uint32_t j) const {
    return index_of(mul(elements_[i], elements_[j]));
  }
  std::uint32_t inv_index(std::uint32_t i) const { return index_of(inv(elements_[i])); }

 private:
  std::uint32_t p_ = 0;
  std::uint32_t identity_ = 0;
  std::vector<PglElement> elements_;
};

/// Shared read-only table cache (thread safe).
std::shared_ptr<const GroupTable> table_for(std::uint32_t p);

/// Rejection sampler: four uniform entries, reject det = 0, canonicalize. Exactly uniform
/// on PGL2 because GL2 -> PGL2 has constant fibre size p - 1.
PglElement sample_uniform(std::uint32_t p, Stream& rng);
PglElement sample_uniform(const GroupTable& table, Stream& rng);

}  // namespace pglfree
