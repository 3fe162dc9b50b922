#pragma once

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "pglfree/pgl.hpp"

namespace pglfree {

/// Minimal group interface consumed by the word enumerators.
template <class Ops>
concept GroupOps = requires(const Ops& ops, const typename Ops::Element& x) {
  { ops.identity() } -> std::convertible_to<typename Ops::Element>;
  { ops.mul(x, x) } -> std::convertible_to<typename Ops::Element>;
  { ops.inv(x) } -> std::convertible_to<typename Ops::Element>;
  { ops.is_identity(x) } -> std::convertible_to<bool>;
  { ops.hash(x) } -> std::convertible_to<std::size_t>;
};

/// PGL2(Z/pZ) on canonical representatives.
struct PglOps {
  using Element = PglElement;
  std::uint32_t p;

  Element identity() const { return pgl_identity(p); }
  Element mul(const Element& x, const Element& y) const { return pglfree::mul(x, y); }
  Element inv(const Element& x) const { return pglfree::inv(x); }
  bool is_identity(const Element& x) const { return x.is_identity(); }
  std::size_t hash(const Element& x) const { return PglHash{}(x); }
};

/// Element of a finite product of PGL2 groups; coordinate j lives in PGL2(Z/p_jZ).
struct TupleElement {
  std::vector<PglElement> coords;

  std::size_t size() const noexcept { return coords.size(); }
  bool is_identity() const noexcept {
    for (const auto& c : coords) {
      if (!c.is_identity()) return false;
    }
    return true;
  }
  /// The first `n` coordinates (the projection onto the first n factors).
  TupleElement prefix(std::size_t n) const {
    return TupleElement{std::vector<PglElement>(coords.begin(), coords.begin() + static_cast<std::ptrdiff_t>(n))};
  }

  friend bool operator==(const TupleElement&, const TupleElement&) = default;
  friend auto operator<=>(const TupleElement& x, const TupleElement& y) { return x.coords <=> y.coords; }
};

struct TupleHash {
  std::size_t operator()(const TupleElement& t) const noexcept {
    std::size_t h = 0x243F6A8885A308D3ULL;
    for (const auto& c : t.coords) h = static_cast<std::size_t>(mix64(h ^ PglHash{}(c)));
    return h;
  }
};

TupleElement tuple_mul(const TupleElement& x, const TupleElement& y);
TupleElement tuple_inv(const TupleElement& x);

/// Coordinate-wise group law on prod_j PGL2(Z/p_jZ).
struct TupleOps {
  using Element = TupleElement;
  std::vector<std::uint32_t> primes;

  Element identity() const;
  Element mul(const Element& x, const Element& y) const { return tuple_mul(x, y); }
  Element inv(const Element& x) const { return tuple_inv(x); }
  bool is_identity(const Element& x) const { return x.is_identity(); }
  std::size_t hash(const Element& x) const { return TupleHash{}(x); }
};

}  // namespace pglfree
