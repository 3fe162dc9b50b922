#include "pglfree/group_ops.hpp"

#include "pglfree/error.hpp"

namespace pglfree {

TupleElement tuple_mul(const TupleElement& x, const TupleElement& y) {
  if (x.size() != y.size()) throw Error(ErrorKind::ModulusMismatch, "tuple lengths differ");
  TupleElement out;
  out.coords.reserve(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) out.coords.push_back(mul(x.coords[j], y.coords[j]));
  return out;
}

TupleElement tuple_inv(const TupleElement& x) {
  TupleElement out;
  out.coords.reserve(x.size());
  for (const auto& c : x.coords) out.coords.push_back(inv(c));
  return out;
}

TupleElement TupleOps::identity() const {
  TupleElement out;
  out.coords.reserve(primes.size());
  for (auto p : primes) out.coords.push_back(pgl_identity(p));
  return out;
}

}  // namespace pglfree
