#include "pglfree/measure.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <unordered_map>

namespace pglfree {

namespace {

const TowerState& tower_of(const TowerMeasure& m) {
  if (m.tower == nullptr) throw Error(ErrorKind::InvalidArgument, "measure has no tower");
  return *m.tower;
}

const LevelSet& level_of(const TowerMeasure& m, std::uint32_t n) {
  const TowerState& t = tower_of(m);
  if (n < 1 || n > t.levels.size()) throw Error(ErrorKind::InvalidArgument, "no level " + std::to_string(n));
  return t.levels[n - 1];
}

/// Integer weights proportional to the masses: nu_0 puts 2 on each point, its
/// symmetrization 1 on x and 1 on x^-1 (total 2|F_n| either way).
std::map<TupleElement, std::uint64_t> integer_weights(const TowerMeasure& m, std::uint32_t n) {
  const LevelSet& level = level_of(m, n);
  std::map<TupleElement, std::uint64_t> w;
  for (const auto& x : level.elements) {
    if (m.symmetrized) {
      ++w[x];
      ++w[tuple_inv(x)];
    } else {
      w[x] += 2;
    }
  }
  return w;
}

}  // namespace

TowerMeasure symmetrize(TowerMeasure m) noexcept {
  m.symmetrized = true;
  return m;
}

bool marginal_consistency(const TowerMeasure& m, std::uint32_t n) {
  const LevelSet& level = level_of(m, n);
  if (n == 1) return true;
  const LevelSet& prev = level_of(m, n - 1);
  const Rational point_mass(1, level.elements.size());
  const Rational target(1, prev.elements.size());
  std::map<TupleElement, Rational> fibre;
  for (const auto& x : level.elements) fibre[x.prefix(prev.n)] += point_mass;
  if (fibre.size() != prev.elements.size()) return false;
  for (const auto& g : prev.elements) {
    const auto it = fibre.find(g);
    if (it == fibre.end() || it->second != target) return false;
  }
  return true;
}

void require_marginal_consistency(const TowerMeasure& m, std::uint32_t n) {
  if (!marginal_consistency(m, n)) {
    throw Error(ErrorKind::InconsistentCovering, "level " + std::to_string(n) + " does not push forward to level " +
                                                     std::to_string(n - 1));
  }
}

NonAtomicReport non_atomic_check(const TowerMeasure& m) {
  const TowerState& t = tower_of(m);
  NonAtomicReport rep;
  rep.non_atomic = !t.levels.empty();
  for (std::size_t i = 0; i < t.levels.size(); ++i) {
    rep.max_mass.emplace_back(1, t.levels[i].elements.size());
    if (i == 0) continue;
    const std::size_t a = t.levels[i - 1].elements.size();
    const std::size_t b = t.levels[i].elements.size();
    const auto r = static_cast<std::uint32_t>(b % a == 0 ? b / a : 0);
    rep.fibres.push_back(r);
    if (r < 2 || !marginal_consistency(m, static_cast<std::uint32_t>(i + 1))) rep.non_atomic = false;
  }
  return rep;
}

std::vector<SupportPoint> support_descriptor(const TowerMeasure& m, std::uint32_t n) {
  const auto w = integer_weights(m, n);
  std::uint64_t total = 0;
  for (const auto& [x, v] : w) total += v;
  std::vector<SupportPoint> out;
  out.reserve(w.size());
  for (const auto& [x, v] : w) out.push_back({x, Rational(v, total)});
  return out;
}

std::vector<SupportPoint> push_forward(const std::vector<SupportPoint>& support, std::size_t width) {
  std::map<TupleElement, Rational> agg;
  for (const auto& s : support) agg[s.point.prefix(width)] += s.mass;
  std::vector<SupportPoint> out;
  for (auto& [x, v] : agg) out.push_back({x, v});
  return out;
}

bool self_adjoint_check(const TowerMeasure& m, std::uint32_t n, std::uint64_t limit) {
  const TowerState& t = tower_of(m);
  const LevelSet& level = level_of(m, n);
  const auto w = integer_weights(m, n);
  std::vector<TupleElement> points;
  std::vector<std::uint64_t> weights;
  for (const auto& [x, v] : w) {
    points.push_back(x);
    weights.push_back(v);
  }
  const auto primes = t.primes();
  const AveragingOperator op = level_operator(points, std::span(primes).first(level.n), limit);
  // lambda(x) maps delta_y to delta_{xy}: entry (push_x[y], y) carries weight w(x).
  const std::uint64_t dim = op.dimension();
  std::unordered_map<std::uint64_t, std::uint64_t> entries;
  entries.reserve(dim * points.size());
  for (std::uint32_t f = 0; f < points.size(); ++f) {
    const auto row = op.push().row(f);
    for (std::uint64_t y = 0; y < dim; ++y) entries[row[y] * dim + y] += weights[f];
  }
  for (const auto& [key, v] : entries) {
    const std::uint64_t r = key / dim;
    const std::uint64_t c = key % dim;
    const auto it = entries.find(c * dim + r);
    if (it == entries.end() || it->second != v) return false;
  }
  return true;
}

C0Profile c0_profile(const TowerMeasure& m) {
  const TowerState& t = tower_of(m);
  C0Profile prof;
  prof.paper_mode = t.schedule.paper_mode;
  for (std::size_t i = 0; i < t.levels.size(); ++i) {
    if (i >= t.certificates.size() || i >= t.specs.size()) {
      throw Error(ErrorKind::MissingCertificate, "level " + std::to_string(i + 1) + " has no certificate");
    }
    const LevelCertificate& cert = t.certificates[i];
    if (cert.gap.verdict != GapVerdict::certified || !cert.gap.certified_upper()) {
      throw Error(ErrorKind::MissingCertificate, "level " + std::to_string(i + 1) + " has no certified gap");
    }
    C0Row row;
    row.n = static_cast<std::uint32_t>(i + 1);
    row.p = t.levels[i].p;
    row.eps = t.specs[i].eps;
    row.base_bound = *cert.gap.certified_upper();
    row.level_bound = cert.bounds.level_bound;
    row.target = t.specs[i].target;
    row.verdict = row.level_bound <= row.target.value() && row.base_bound <= row.eps.value();
    prof.rows.push_back(row);
  }
  return prof;
}

std::string profile_table(const C0Profile& profile) {
  std::ostringstream os;
  os << "n\tp\teps\tbase_bound\tlevel_bound\ttarget\tverdict\n";
  char buf[64];
  for (const auto& r : profile.rows) {
    os << r.n << '\t' << r.p << '\t' << r.eps.to_string() << '\t';
    std::snprintf(buf, sizeof buf, "%.12f\t%.12f", r.base_bound, r.level_bound);
    os << buf << '\t' << r.target.to_string() << '\t' << (r.verdict ? "ok" : "missed") << '\n';
  }
  return os.str();
}

}  // namespace pglfree
