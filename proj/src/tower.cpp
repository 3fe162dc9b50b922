#include "pglfree/tower.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <unordered_set>

namespace pglfree {

Ratio Ratio::make(std::uint64_t num, std::uint64_t den) {
  if (den == 0) throw Error(ErrorKind::InvalidArgument, "zero denominator");
  const std::uint64_t g = std::gcd(num, den);
  return g == 0 ? Ratio{0, 1} : Ratio{num / g, den / g};
}

Ratio Ratio::parse(std::string_view text) {
  auto digits = [&](std::string_view s) {
    if (s.empty() || s.size() > 18) throw Error(ErrorKind::InvalidArgument, "bad rational: " + std::string(text));
    std::uint64_t v = 0;
    for (char c : s) {
      if (c < '0' || c > '9') throw Error(ErrorKind::InvalidArgument, "bad rational: " + std::string(text));
      v = v * 10 + static_cast<std::uint64_t>(c - '0');
    }
    return v;
  };
  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    return make(digits(text.substr(0, slash)), digits(text.substr(slash + 1)));
  }
  if (const auto dot = text.find('.'); dot != std::string_view::npos) {
    const std::string_view whole = text.substr(0, dot);
    const std::string_view frac = text.substr(dot + 1);
    std::uint64_t den = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
    const std::uint64_t w = whole.empty() ? 0 : digits(whole);
    const std::uint64_t f = frac.empty() ? 0 : digits(frac);
    return make(w * den + f, den);
  }
  return make(digits(text), 1);
}

std::string Ratio::to_string() const {
  return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
}

bool operator<(const Ratio& x, const Ratio& y) noexcept {
  return static_cast<unsigned __int128>(x.num) * y.den < static_cast<unsigned __int128>(y.num) * x.den;
}

std::uint32_t min_k2(std::uint32_t n, std::uint64_t k1) noexcept {
  return static_cast<std::uint32_t>(std::max<std::uint64_t>(2ULL * n + 1, k1) + 1);
}

std::uint32_t level_relation_length(std::uint32_t n, std::uint32_t ell) noexcept {
  return n == 1 ? ell : std::max(1u, ell / 3);
}

std::uint32_t lemma_k(std::uint32_t p) noexcept {
  const double l = std::log(static_cast<double>(p));
  return static_cast<std::uint32_t>(std::floor(l * l));
}

LevelSpec level_spec(const Schedule& schedule, std::uint32_t n, std::uint64_t k1) {
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "levels are numbered from 1");
  LevelSpec spec;
  spec.n = n;
  spec.p_min = schedule.p_min;
  spec.p_max = schedule.p_max;
  spec.retry_budget = schedule.retry_budget;
  spec.k_growth = schedule.k_growth;
  spec.paper_mode = schedule.paper_mode;
  if (schedule.paper_mode) {
    spec.eps = Ratio::make(1, 4ULL * n);
    spec.ell = 3 * n;
    spec.target = Ratio::make(1, n);
  } else {
    if (n > schedule.eps.size() || n > schedule.ell.size()) {
      throw Error(ErrorKind::InvalidArgument, "schedule has no entry for level " + std::to_string(n));
    }
    spec.eps = schedule.eps[n - 1];
    spec.ell = schedule.ell[n - 1];
    spec.target = schedule.target;
  }
  spec.k2_min = std::max(min_k2(n, k1), schedule.k2_min);
  return spec;
}

namespace {

std::vector<PglElement> sample_distinct(const GroupTable& table, std::uint32_t k, Stream& rng) {
  std::vector<PglElement> out;
  std::unordered_set<std::uint32_t> seen;
  while (out.size() < k) {
    const PglElement g = sample_uniform(table, rng);
    if (seen.insert(table.index_of(g)).second) out.push_back(g);
  }
  return out;
}

double round_up(double x) { return std::nextafter(x, std::numeric_limits<double>::infinity()); }

struct SearchParams {
  std::uint32_t n = 1;
  double eps = 0.5;
  std::uint32_t ell = 1;
  std::uint32_t k_min = 1;
  std::uint32_t p_min = 2;
  std::uint32_t p_max = 2;
  std::uint32_t retry_budget = 0;
  std::uint32_t k_growth = 0;
  /// 0 at the base level.
  std::uint64_t k1 = 0;
  Ratio target = Ratio::make(1, 1);
};

bool try_attempt(const SearchParams& sp, const GroupTable& table, std::vector<PglElement> gens, Stream& rng,
                 const TowerOptions& opts, AttemptRecord& rec, BaseSetResult& out) {
  RelationReport rel = check_no_relations(gens, sp.ell, table, opts.relations);
  if (rel.witness) {
    rec.outcome = "relation";
    rec.detail = rel.witness->to_string();
    return false;
  }
  if (rel.inconclusive) {
    rec.outcome = "relation-budget";
    rec.detail = std::to_string(rel.words_checked) + " words";
    return false;
  }
  GapOptions go = opts.gap;
  go.parallel = opts.parallel;
  GapCertificate gap;
  try {
    gap = certify_gap(table, gens, sp.eps, go, rng.child("gap").key());
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::BudgetExceeded) throw;
    rec.outcome = "gap-inconclusive";
    rec.detail = e.what();
    return false;
  }
  if (gap.verdict != GapVerdict::certified) {
    rec.outcome = gap.verdict == GapVerdict::refuted ? "gap-refuted" : "gap-inconclusive";
    char buf[64];
    std::snprintf(buf, sizeof buf, "lower %.9f", gap.estimate.lower_bound);
    rec.detail = buf;
    return false;
  }
  auto gen = generation_records(table, gens, sp.k1, opts.generation_dense_limit);
  for (const auto& g : gen) {
    if (!g.generates) {
      rec.outcome = "generation";
      rec.detail = "i=" + std::to_string(g.index) + " closure " + std::to_string(g.closure);
      return false;
    }
  }
  const LevelBounds bounds =
      level_bounds(sp.n, static_cast<std::uint32_t>(gens.size()), *gap.certified_upper(), sp.target);
  if (!bounds.target_met) {
    rec.outcome = "target-missed";
    char buf[96];
    std::snprintf(buf, sizeof buf, "bound %.9f exceeds target by %.9f", bounds.level_bound,
                  bounds.level_bound - sp.target.value());
    rec.detail = buf;
    return false;
  }
  rec.outcome = "accepted";
  out.p = table.prime();
  out.gens = std::move(gens);
  out.gap = std::move(gap);
  out.relations = std::move(rel);
  out.generation = std::move(gen);
  return true;
}

BaseSetResult search_base_set(const SearchParams& sp, const TowerOptions& opts, std::uint64_t seed) {
  if (!(sp.eps > 0.0) || sp.eps > 1.0) throw Error(ErrorKind::InvalidArgument, "eps must lie in (0, 1]");
  if (sp.ell < 1) throw Error(ErrorKind::InvalidArgument, "relation length must be >= 1");
  BaseSetResult out;
  for (std::uint32_t p = std::max(2u, sp.p_min); p <= sp.p_max; ++p) {
    if (!is_prime(p)) continue;
    std::shared_ptr<const GroupTable> table;
    try {
      table = table_for(p);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::TooLarge) throw;
      break;
    }
    const std::uint32_t k_base = std::max(sp.k_min, lemma_k(p));
    for (std::uint32_t step = 0; step <= sp.k_growth; ++step) {
      const std::uint32_t k = k_base + step;
      if (k > table->order()) break;
      for (std::uint32_t attempt = 0; attempt < sp.retry_budget; ++attempt) {
        Stream rng(seed, "base-set", sp.n, p, (std::uint64_t{k} << 32) | attempt);
        AttemptRecord rec{p, k, attempt, "", ""};
        auto gens = sample_distinct(*table, k, rng);
        const bool ok = try_attempt(sp, *table, std::move(gens), rng, opts, rec, out);
        out.history.push_back(rec);
        if (ok) return out;
      }
    }
  }
  const std::string what = "no base set for level " + std::to_string(sp.n) + " with primes in [" +
                           std::to_string(sp.p_min) + ", " + std::to_string(sp.p_max) + "] after " +
                           std::to_string(out.history.size()) + " attempts";
  throw SearchExhaustedError(what, std::move(out.history));
}

std::uint64_t product_order(std::span<const std::uint32_t> primes, std::uint64_t limit) {
  unsigned __int128 n = 1;
  for (auto p : primes) {
    n *= order_formula(p);
    if (n > limit) {
      throw Error(ErrorKind::TooLarge, "|K_n| exceeds the direct-mode limit " + std::to_string(limit));
    }
  }
  return static_cast<std::uint64_t>(n);
}

}  // namespace

BaseSetResult lemma_search(const LemmaQuery& q, const TowerOptions& opts, std::uint64_t seed) {
  SearchParams sp;
  sp.n = 1;
  sp.eps = q.eps;
  sp.ell = q.ell;
  sp.k_min = std::max(1u, q.k0);
  sp.p_min = q.p0;
  sp.p_max = q.p_max;
  sp.retry_budget = q.retry_budget;
  sp.k_growth = q.k_growth;
  sp.target = Ratio::make(1, 1);
  return search_base_set(sp, opts, seed);
}

BaseSetResult propose_base_set(const LevelSpec& spec, std::uint64_t k1, const TowerOptions& opts,
                               std::uint64_t seed) {
  SearchParams sp;
  sp.n = spec.n;
  sp.eps = spec.eps.value();
  sp.ell = spec.ell;
  sp.k_min = std::max(spec.k2_min, min_k2(spec.n, k1));
  sp.p_min = spec.p_min;
  sp.p_max = spec.p_max;
  sp.retry_budget = spec.retry_budget;
  sp.k_growth = spec.k_growth;
  sp.k1 = spec.n == 1 ? 0 : k1;
  sp.target = spec.target;
  return search_base_set(sp, opts, seed);
}

LevelSet build_base_level(std::uint32_t p, std::span<const PglElement> base) {
  if (base.empty()) throw Error(ErrorKind::TooFewGenerators, "empty base set");
  LevelSet level;
  level.n = 1;
  level.p = p;
  level.base_gens.assign(base.begin(), base.end());
  std::set<PglElement> seen;
  for (const auto& h : base) {
    if (h.modulus() != p) throw Error(ErrorKind::ModulusMismatch, "base element not in Gamma_p");
    if (!seen.insert(h).second) throw Error(ErrorKind::InvalidArgument, "base set has repeated elements");
    level.elements.push_back(TupleElement{{h}});
  }
  return level;
}

LevelSet build_level(const LevelSet& prev, std::uint32_t p, std::span<const PglElement> base) {
  const std::size_t k1 = prev.elements.size();
  const std::size_t k2 = base.size();
  if (k2 < std::max<std::size_t>(k1, 3)) {
    throw Error(ErrorKind::TooFewGenerators,
                "k2 = " + std::to_string(k2) + " < max(k1, 3) with k1 = " + std::to_string(k1));
  }
  LevelSet level;
  level.n = prev.n + 1;
  level.p = p;
  level.base_gens.assign(base.begin(), base.end());
  level.elements.reserve(k1 * (k2 - 1));
  for (std::size_t i = 0; i < k1; ++i) {
    const PglElement& hi = base[i];
    const PglElement hi_inv = inv(hi);
    for (std::size_t j = 0; j < k2; ++j) {
      if (j == i) continue;
      TupleElement t = prev.elements[i];
      t.coords.push_back(mul(mul(hi, base[j]), hi_inv));
      level.elements.push_back(std::move(t));
    }
  }
  return level;
}

std::uint32_t verify_covering(const LevelSet& level, const LevelSet* prev) {
  if (prev == nullptr) return 0;
  const std::size_t width = prev->n;
  std::map<TupleElement, std::uint32_t> fibre;
  for (const auto& x : level.elements) {
    if (x.size() != width + 1) throw Error(ErrorKind::CoveringViolation, "element has the wrong number of coordinates");
    ++fibre[x.prefix(width)];
  }
  std::set<TupleElement> previous(prev->elements.begin(), prev->elements.end());
  for (const auto& [base, count] : fibre) {
    if (!previous.count(base)) {
      throw Error(ErrorKind::CoveringViolation, "projection " + std::to_string(base.coords.back().a()) +
                                                    "... is not an element of the previous level");
    }
  }
  if (fibre.size() != previous.size()) {
    throw Error(ErrorKind::CoveringViolation, std::to_string(previous.size() - fibre.size()) +
                                                  " elements of the previous level have empty fibres");
  }
  const std::uint32_t r = fibre.begin()->second;
  std::size_t pos = 0;
  for (const auto& [base, count] : fibre) {
    if (count != r) {
      throw Error(ErrorKind::CoveringViolation, "fibre " + std::to_string(pos) + " has " + std::to_string(count) +
                                                    " points, expected " + std::to_string(r));
    }
    ++pos;
  }
  if (r < 2) throw Error(ErrorKind::CoveringViolation, "fibre size " + std::to_string(r) + " < 2");
  return r;
}

LevelBounds level_bounds(std::uint32_t n, std::uint32_t k2, double b, const Ratio& target) {
  LevelBounds out;
  if (n <= 1) {
    out.derived_bound = out.sharp_bound = out.level_bound = b;
  } else {
    if (k2 < 2) throw Error(ErrorKind::TooFewGenerators, "k2 < 2");
    out.derived_bound = round_up(2.0 * b + 1.0 / (2.0 * n));
    out.sharp_bound = round_up((k2 * b + 1.0) / (k2 - 1.0));
    out.level_bound = std::min(out.derived_bound, out.sharp_bound);
  }
  out.target_met = out.level_bound <= target.value();
  return out;
}

AveragingOperator level_operator(std::span<const TupleElement> elements, std::span<const std::uint32_t> primes,
                                 std::uint64_t limit) {
  if (elements.empty()) throw Error(ErrorKind::InvalidArgument, "empty level");
  const std::size_t width = primes.size();
  const std::uint64_t total = product_order(primes, limit);
  std::vector<std::shared_ptr<const GroupTable>> tables;
  std::vector<std::uint64_t> stride(width), radix(width);
  for (std::size_t j = 0; j < width; ++j) {
    tables.push_back(table_for(primes[j]));
    radix[j] = tables[j]->order();
  }
  std::uint64_t s = 1;
  for (std::size_t j = width; j-- > 0;) {
    stride[j] = s;
    s *= radix[j];
  }
  PermutationSet push, pull;
  push.size = pull.size = total;
  push.count = pull.count = static_cast<std::uint32_t>(elements.size());
  push.data.resize(total * elements.size());
  pull.data.resize(total * elements.size());
  std::vector<std::vector<std::uint64_t>> lp(width), lq(width);
  for (std::uint32_t f = 0; f < elements.size(); ++f) {
    const TupleElement& t = elements[f];
    if (t.size() != width) throw Error(ErrorKind::ModulusMismatch, "tuple length does not match the primes");
    for (std::size_t j = 0; j < width; ++j) {
      const GroupTable& tab = *tables[j];
      const PglElement fi = inv(t.coords[j]);
      lp[j].resize(radix[j]);
      lq[j].resize(radix[j]);
      for (std::uint32_t d = 0; d < radix[j]; ++d) {
        lp[j][d] = tab.index_of(mul(t.coords[j], tab.element(d))) * stride[j];
        lq[j][d] = tab.index_of(mul(fi, tab.element(d))) * stride[j];
      }
    }
    std::uint32_t* out_push = push.data.data() + std::size_t{f} * total;
    std::uint32_t* out_pull = pull.data.data() + std::size_t{f} * total;
    std::vector<std::uint64_t> digit(width, 0);
    for (std::uint64_t x = 0; x < total; ++x) {
      std::uint64_t a = 0, b = 0;
      for (std::size_t j = 0; j < width; ++j) {
        a += lp[j][digit[j]];
        b += lq[j][digit[j]];
      }
      out_push[x] = static_cast<std::uint32_t>(a);
      out_pull[x] = static_cast<std::uint32_t>(b);
      for (std::size_t j = width; j-- > 0;) {
        if (++digit[j] < radix[j]) break;
        digit[j] = 0;
      }
    }
  }
  return AveragingOperator(std::move(push), std::move(pull), radix.back());
}

NormEstimate direct_level_norm(const LevelSet& level, std::span<const std::uint32_t> primes, const TowerOptions& opts,
                               std::uint64_t seed) {
  const auto op = level_operator(level.elements, primes.first(level.n), opts.direct_limit);
  PowerOptions po = opts.direct_power;
  po.parallel = opts.parallel;
  Stream rng(seed, "direct-norm", level.n);
  return estimate_norm_power(op, po, rng);
}

RelationReport verify_level_relations(const LevelSet& level, std::span<const std::uint32_t> primes, std::uint32_t ell,
                                      const RelationOptions& opts) {
  TupleOps ops{std::vector<std::uint32_t>(primes.begin(), primes.begin() + level.n)};
  return check_no_relations<TupleOps>(std::span<const TupleElement>(level.elements), ell, ops, opts);
}

std::vector<GenerationRecord> generation_records(const GroupTable& table, std::span<const PglElement> base,
                                                 std::uint64_t k1, std::uint64_t dense_limit) {
  std::vector<GenerationRecord> out;
  if (k1 == 0) {
    out.push_back({0, closure_size(table, base), false, std::nullopt});
    out.back().generates = out.back().closure == table.order();
    return out;
  }
  const std::size_t k2 = base.size();
  if (k2 < 3 || k1 > k2) throw Error(ErrorKind::TooFewGenerators, "need 3 <= k2 and k1 <= k2");
  for (std::uint32_t i = 0; i < k1; ++i) {
    std::vector<PglElement> h, rest;
    for (std::size_t s = 0; s < k2; ++s) {
      if (s == i) continue;
      rest.push_back(base[s]);
      for (std::size_t t = 0; t < k2; ++t) {
        if (t != i) h.push_back(mul(base[s], inv(base[t])));
      }
    }
    GenerationRecord rec{i, closure_size(table, h), false, std::nullopt};
    rec.generates = rec.closure == table.order();
    if (table.order() <= dense_limit) {
      rec.dense_norm = dense_norm(AveragingOperator(table, rest));
      if (*rec.dense_norm + kDenseMargin < 1.0 && !rec.generates) {
        throw Error(ErrorKind::InvalidArgument, "||R_i|| < 1 but H_i does not generate");
      }
    }
    out.push_back(rec);
  }
  return out;
}

std::vector<GenerationRecord> verify_generation(const GroupTable& table, std::span<const PglElement> base,
                                                std::uint64_t k1, std::uint64_t dense_limit) {
  auto recs = generation_records(table, base, k1, dense_limit);
  for (const auto& r : recs) {
    if (!r.generates) {
      throw Error(ErrorKind::GenerationFailure, "H_" + std::to_string(r.index) + " generates a subgroup of order " +
                                                    std::to_string(r.closure));
    }
  }
  return recs;
}

std::vector<std::uint32_t> TowerState::primes() const {
  std::vector<std::uint32_t> out;
  for (const auto& l : levels) out.push_back(l.p);
  return out;
}

TowerState extend_tower(const TowerState& state, const LevelSpec& spec, const TowerOptions& opts) {
  const auto n = static_cast<std::uint32_t>(state.levels.size() + 1);
  if (spec.n != n) throw Error(ErrorKind::InvalidArgument, "spec is for level " + std::to_string(spec.n));
  const LevelSet* prev = n == 1 ? nullptr : &state.levels.back();
  const std::uint64_t k1 = prev ? prev->elements.size() : 1;
  BaseSetResult base = propose_base_set(spec, k1, opts, state.seed);

  LevelSet level = prev ? build_level(*prev, base.p, base.gens) : build_base_level(base.p, base.gens);
  LevelCertificate cert;
  cert.r = verify_covering(level, prev);
  cert.gap = std::move(base.gap);
  cert.base_relations = std::move(base.relations);
  cert.generation = std::move(base.generation);
  cert.history = std::move(base.history);
  cert.relation_length = level_relation_length(n, spec.ell);

  std::vector<std::uint32_t> primes = state.primes();
  primes.push_back(level.p);
  cert.relations = verify_level_relations(level, primes, cert.relation_length, opts.relations);
  if (cert.relations.inconclusive) throw Error(ErrorKind::BudgetExceeded, "level relation check ran out of budget");
  if (cert.relations.witness) {
    throw Error(ErrorKind::InvalidArgument, "level " + std::to_string(n) + " has relation " +
                                                cert.relations.witness->to_string() + " despite a clean base set");
  }
  cert.bounds = level_bounds(n, static_cast<std::uint32_t>(level.base_gens.size()), *cert.gap.certified_upper(),
                             spec.target);
  if (!cert.bounds.target_met) throw Error(ErrorKind::TargetMissed, "accepted base set misses the target");

  if (opts.direct && n >= 2) {
    bool small = true;
    try {
      product_order(primes, opts.direct_limit);
    } catch (const Error&) {
      small = false;
    }
    if (small) {
      cert.direct = direct_level_norm(level, primes, opts, state.seed);
      cert.mode = "direct";
      if (cert.direct->lower_bound > cert.bounds.level_bound + kRefuteMargin) {
        throw Error(ErrorKind::TargetMissed, "direct norm exceeds the bound-mode value");
      }
    }
  }

  TowerState next = state;
  next.specs.push_back(spec);
  next.levels.push_back(std::move(level));
  next.certificates.push_back(std::move(cert));
  return next;
}

TowerState build_tower(TowerState state, const TowerOptions& opts) {
  while (state.levels.size() < state.schedule.levels() || (state.schedule.paper_mode && state.levels.empty())) {
    const auto n = static_cast<std::uint32_t>(state.levels.size() + 1);
    const std::uint64_t k1 = state.levels.empty() ? 1 : state.levels.back().elements.size();
    state = extend_tower(state, level_spec(state.schedule, n, k1), opts);
  }
  return state;
}

bool VerifyReport::ok() const noexcept {
  return std::all_of(checks.begin(), checks.end(), [](const VerifyCheck& c) { return c.ok; });
}

namespace {

void add(VerifyReport& rep, std::uint32_t level, std::string name, bool ok, std::string detail = {}) {
  rep.checks.push_back({level, std::move(name), ok, std::move(detail)});
}

bool same_bound(double x, double y) { return std::abs(x - y) <= 1e-12 * std::max(1.0, std::abs(x)); }

void verify_gap_record(VerifyReport& rep, std::uint32_t n, const LevelSet& level, const LevelSpec& spec,
                       const GapCertificate& gap, const TowerOptions& opts) {
  if (gap.p != level.p || gap.gens != level.base_gens) {
    add(rep, n, "gap", false, "certificate is for a different base set");
    return;
  }
  if (gap.verdict != GapVerdict::certified || !gap.certified_upper()) {
    add(rep, n, "gap", false, "certificate is not certified");
    return;
  }
  if (!same_bound(gap.eps, spec.eps.value())) {
    add(rep, n, "gap", false, "certificate eps differs from the level eps");
    return;
  }
  try {
    const GapRecheck rc = recheck_gap(gap, opts.gap.dense_limit, opts.parallel);
    add(rep, n, "gap", rc.ok, rc.detail);
  } catch (const Error& e) {
    add(rep, n, "gap", false, e.what());
  }
}

}  // namespace

VerifyReport reverify(const TowerState& state, const TowerOptions& opts) {
  VerifyReport rep;
  if (state.levels.size() != state.certificates.size() || state.levels.size() != state.specs.size()) {
    add(rep, 0, "structure", false, "levels, specs and certificates differ in count");
    return rep;
  }
  const auto primes = state.primes();
  for (std::size_t idx = 0; idx < state.levels.size(); ++idx) {
    const auto n = static_cast<std::uint32_t>(idx + 1);
    const LevelSet& level = state.levels[idx];
    const LevelCertificate& cert = state.certificates[idx];
    const LevelSpec& spec = state.specs[idx];
    const LevelSet* prev = idx == 0 ? nullptr : &state.levels[idx - 1];
    std::shared_ptr<const GroupTable> table;
    try {
      table = table_for(level.p);
    } catch (const Error& e) {
      add(rep, n, "table", false, e.what());
      continue;
    }

    if (spec.paper_mode) {
      add(rep, n, "schedule", spec.eps == Ratio::make(1, 4ULL * n) && spec.ell == 3 * n &&
                                  spec.target == Ratio::make(1, n));
    }
    add(rep, n, "k2", level.base_gens.size() >= min_k2(n, prev ? prev->elements.size() : 1),
        "k2=" + std::to_string(level.base_gens.size()));

    try {
      const LevelSet rebuilt = prev ? build_level(*prev, level.p, level.base_gens)
                                    : build_base_level(level.p, level.base_gens);
      add(rep, n, "construction", rebuilt == level);
    } catch (const Error& e) {
      add(rep, n, "construction", false, e.what());
    }
    try {
      const std::uint32_t r = verify_covering(level, prev);
      add(rep, n, "covering", r == cert.r, "r=" + std::to_string(r));
    } catch (const Error& e) {
      add(rep, n, "covering", false, e.what());
    }
    bool proj_ok = true;
    for (std::size_t m = 0; m < idx; ++m) {
      std::set<TupleElement> proj;
      for (const auto& x : level.elements) proj.insert(x.prefix(m + 1));
      const std::set<TupleElement> lower(state.levels[m].elements.begin(), state.levels[m].elements.end());
      proj_ok = proj_ok && proj == lower;
    }
    add(rep, n, "projection", proj_ok);

    try {
      const RelationReport base_rel = check_no_relations(level.base_gens, spec.ell, *table, opts.relations);
      add(rep, n, "base-relations", base_rel.clean() && cert.base_relations.clean(),
          "ell=" + std::to_string(spec.ell) + " words=" + std::to_string(base_rel.words_checked));
      const RelationReport rel = verify_level_relations(level, primes, cert.relation_length, opts.relations);
      add(rep, n, "relations", rel.clean() && cert.relations.clean() &&
                                   cert.relation_length == level_relation_length(n, spec.ell),
          "ell=" + std::to_string(cert.relation_length));
    } catch (const Error& e) {
      add(rep, n, "relations", false, e.what());
    }

    try {
      const auto gen = generation_records(*table, level.base_gens, n == 1 ? 0 : prev->elements.size(),
                                          opts.generation_dense_limit);
      bool ok = gen.size() == cert.generation.size();
      for (std::size_t i = 0; ok && i < gen.size(); ++i) {
        ok = gen[i].generates && gen[i].closure == cert.generation[i].closure &&
             gen[i].dense_norm.has_value() == cert.generation[i].dense_norm.has_value() &&
             (!gen[i].dense_norm || std::abs(*gen[i].dense_norm - *cert.generation[i].dense_norm) <= 1e-9);
      }
      add(rep, n, "generation", ok, std::to_string(gen.size()) + " sets");
    } catch (const Error& e) {
      add(rep, n, "generation", false, e.what());
    }

    verify_gap_record(rep, n, level, spec, cert.gap, opts);

    if (cert.gap.certified_upper()) {
      const LevelBounds b = level_bounds(n, static_cast<std::uint32_t>(level.base_gens.size()),
                                         *cert.gap.certified_upper(), spec.target);
      add(rep, n, "bounds", b.target_met && same_bound(b.level_bound, cert.bounds.level_bound) &&
                                same_bound(b.derived_bound, cert.bounds.derived_bound),
          "level bound " + std::to_string(b.level_bound));
    }
    if (cert.direct) {
      add(rep, n, "direct", cert.direct->lower_bound <= cert.bounds.level_bound + kRefuteMargin,
          "recorded " + std::to_string(cert.direct->lower_bound));
    }
  }
  return rep;
}

}  // namespace pglfree
