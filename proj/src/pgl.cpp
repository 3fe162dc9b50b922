#include "pglfree/pgl.hpp"

#include <map>
#include <mutex>
#include <sstream>

#include "pglfree/error.hpp"

namespace pglfree {

bool is_prime(std::uint64_t n) noexcept {
  if (n < 2) return false;
  if (n % 2 == 0) return n == 2;
  for (std::uint64_t f = 3; f * f <= n; f += 2) {
    if (n % f == 0) return false;
  }
  return true;
}

namespace fp {

std::uint32_t inv(std::uint32_t x, std::uint32_t p) noexcept {
  std::int64_t r0 = p, r1 = x, t0 = 0, t1 = 1;
  while (r1 != 0) {
    const std::int64_t q = r0 / r1;
    std::int64_t tmp = r0 - q * r1;
    r0 = r1;
    r1 = tmp;
    tmp = t0 - q * t1;
    t0 = t1;
    t1 = tmp;
  }
  return reduce(t0, p);
}

std::uint32_t reduce(std::int64_t x, std::uint32_t p) noexcept {
  std::int64_t r = x % static_cast<std::int64_t>(p);
  if (r < 0) r += p;
  return static_cast<std::uint32_t>(r);
}

}  // namespace fp

Mat2 Mat2::make(std::uint32_t p, std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t d) {
  if (p < 2 || p >= (1u << 31)) throw Error(ErrorKind::InvalidArgument, "modulus out of range");
  return Mat2{p, fp::reduce(a, p), fp::reduce(b, p), fp::reduce(c, p), fp::reduce(d, p)};
}

std::uint32_t Mat2::det() const noexcept { return fp::sub(fp::mul(a, d, p), fp::mul(b, c, p), p); }

Mat2 Mat2::operator*(const Mat2& o) const noexcept {
  return Mat2{p, fp::add(fp::mul(a, o.a, p), fp::mul(b, o.c, p), p),
              fp::add(fp::mul(a, o.b, p), fp::mul(b, o.d, p), p),
              fp::add(fp::mul(c, o.a, p), fp::mul(d, o.c, p), p),
              fp::add(fp::mul(c, o.b, p), fp::mul(d, o.d, p), p)};
}

Mat2 Mat2::adjugate() const noexcept { return Mat2{p, d, fp::neg(b, p), fp::neg(c, p), a}; }

Mat2 Mat2::scaled(std::uint32_t s) const noexcept {
  return Mat2{p, fp::mul(a, s, p), fp::mul(b, s, p), fp::mul(c, s, p), fp::mul(d, s, p)};
}

PglElement canonicalize(const Mat2& m) {
  if (m.det() == 0) throw Error(ErrorKind::SingularMatrix, "determinant is zero mod p");
  const std::uint32_t lead = m.a != 0 ? m.a : m.b;
  if (lead == 1) return PglElement(m);
  return PglElement(m.scaled(fp::inv(lead, m.p)));
}

PglElement pgl_identity(std::uint32_t p) { return canonicalize(Mat2::make(p, 1, 0, 0, 1)); }

PglElement mul(const PglElement& x, const PglElement& y) {
  if (x.modulus() != y.modulus()) {
    throw Error(ErrorKind::ModulusMismatch,
                std::to_string(x.modulus()) + " vs " + std::to_string(y.modulus()));
  }
  return canonicalize(x.matrix() * y.matrix());
}

PglElement inv(const PglElement& x) noexcept {
  // The adjugate of an invertible matrix is invertible, so this cannot throw.
  return canonicalize(x.matrix().adjugate());
}

Encoding PglElement::encode() const noexcept {
  Encoding out{};
  const std::uint32_t words[5] = {m_.p, m_.a, m_.b, m_.c, m_.d};
  for (int w = 0; w < 5; ++w) {
    for (int byte = 0; byte < 4; ++byte) {
      out[static_cast<std::size_t>(4 * w + byte)] = static_cast<std::uint8_t>(words[w] >> (8 * byte));
    }
  }
  return out;
}

PglElement PglElement::decode(std::span<const std::uint8_t> bytes) {
  if (bytes.size() != kEncodedSize) throw Error(ErrorKind::Format, "element encoding must be 20 bytes");
  std::uint32_t words[5] = {};
  for (int w = 0; w < 5; ++w) {
    for (int byte = 0; byte < 4; ++byte) {
      words[w] |= std::uint32_t{bytes[static_cast<std::size_t>(4 * w + byte)]} << (8 * byte);
    }
  }
  const std::uint32_t p = words[0];
  if (p < 2 || p >= (1u << 31) || !is_prime(p)) throw Error(ErrorKind::Format, "bad modulus in encoding");
  for (int w = 1; w < 5; ++w) {
    if (words[w] >= p) throw Error(ErrorKind::Format, "unreduced entry in encoding");
  }
  const Mat2 m{p, words[1], words[2], words[3], words[4]};
  if (m.det() == 0) throw Error(ErrorKind::Format, "singular matrix in encoding");
  const PglElement g = canonicalize(m);
  if (!(g.matrix() == m)) throw Error(ErrorKind::Format, "non-canonical matrix in encoding");
  return g;
}

std::string PglElement::to_string() const {
  std::ostringstream os;
  os << "[[" << m_.a << "," << m_.b << "],[" << m_.c << "," << m_.d << "]]/" << m_.p;
  return os.str();
}

std::strong_ordering operator<=>(const PglElement& x, const PglElement& y) noexcept {
  const auto& l = x.m_;
  const auto& r = y.m_;
  if (auto c = l.p <=> r.p; c != 0) return c;
  if (auto c = l.a <=> r.a; c != 0) return c;
  if (auto c = l.b <=> r.b; c != 0) return c;
  if (auto c = l.c <=> r.c; c != 0) return c;
  return l.d <=> r.d;
}

std::size_t PglHash::operator()(const PglElement& g) const noexcept {
  std::uint64_t h = g.modulus();
  h = mix64(h * 0x100000001B3ULL ^ g.a());
  h = mix64(h ^ (std::uint64_t{g.b()} << 32 | g.c()));
  return static_cast<std::size_t>(mix64(h ^ g.d()));
}

std::uint64_t order_formula(std::uint64_t p) {
  if (!is_prime(p)) throw Error(ErrorKind::NotPrime, std::to_string(p));
  return (p - 1) * p * (p + 1);
}

GroupTable GroupTable::build(std::uint32_t p, std::uint64_t max_order) {
  const std::uint64_t order = order_formula(p);
  if (p >= (1u << 31)) throw Error(ErrorKind::InvalidArgument, "modulus must be below 2^31");
  if (order > max_order) {
    throw Error(ErrorKind::TooLarge, "|PGL2(" + std::to_string(p) + ")| = " + std::to_string(order) +
                                         " exceeds limit " + std::to_string(max_order));
  }
  GroupTable t;
  t.p_ = p;
  t.elements_.reserve(order);
  for (std::uint32_t c = 1; c < p; ++c) {
    for (std::uint32_t d = 0; d < p; ++d) t.elements_.push_back(PglElement(Mat2{p, 0, 1, c, d}));
  }
  for (std::uint32_t b = 0; b < p; ++b) {
    for (std::uint32_t c = 0; c < p; ++c) {
      const std::uint32_t bc = fp::mul(b, c, p);
      for (std::uint32_t d = 0; d < p; ++d) {
        if (d != bc) t.elements_.push_back(PglElement(Mat2{p, 1, b, c, d}));
      }
    }
  }
  t.identity_ = t.index_of(pgl_identity(p));
  return t;
}

std::uint32_t GroupTable::index_of(const PglElement& g) const {
  if (g.modulus() != p_) throw Error(ErrorKind::ModulusMismatch, "element not in this table");
  const std::uint64_t p = p_;
  if (g.a() == 0) return static_cast<std::uint32_t>((g.c() - 1) * p + g.d());
  const std::uint64_t offset = p * (p - 1);
  const std::uint32_t bc = fp::mul(g.b(), g.c(), p_);
  const std::uint64_t dpos = g.d() < bc ? g.d() : g.d() - 1;
  return static_cast<std::uint32_t>(offset + (g.b() * p + g.c()) * (p - 1) + dpos);
}

std::shared_ptr<const GroupTable> table_for(std::uint32_t p) {
  static std::mutex mu;
  static std::map<std::uint32_t, std::shared_ptr<const GroupTable>> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(p);
  if (it != cache.end()) return it->second;
  auto t = std::make_shared<const GroupTable>(GroupTable::build(p));
  cache.emplace(p, t);
  return t;
}

PglElement sample_uniform(std::uint32_t p, Stream& rng) {
  for (;;) {
    const Mat2 m{p, static_cast<std::uint32_t>(rng.below(p)), static_cast<std::uint32_t>(rng.below(p)),
                 static_cast<std::uint32_t>(rng.below(p)), static_cast<std::uint32_t>(rng.below(p))};
    if (m.det() != 0) return canonicalize(m);
  }
}

PglElement sample_uniform(const GroupTable& table, Stream& rng) { return sample_uniform(table.prime(), rng); }

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::SingularMatrix: return "SingularMatrix";
    case ErrorKind::ModulusMismatch: return "ModulusMismatch";
    case ErrorKind::NotPrime: return "NotPrime";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::EmptyWord: return "EmptyWord";
    case ErrorKind::NotReduced: return "NotReduced";
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::BudgetExceeded: return "BudgetExceeded";
    case ErrorKind::SearchExhausted: return "SearchExhausted";
    case ErrorKind::TooFewGenerators: return "TooFewGenerators";
    case ErrorKind::CoveringViolation: return "CoveringViolation";
    case ErrorKind::TargetMissed: return "TargetMissed";
    case ErrorKind::GenerationFailure: return "GenerationFailure";
    case ErrorKind::InconsistentCovering: return "InconsistentCovering";
    case ErrorKind::MissingCertificate: return "MissingCertificate";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Format: return "Format";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace pglfree
