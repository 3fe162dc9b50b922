#include "pglfree/cli.hpp"

#include <omp.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "pglfree/measure.hpp"
#include "pglfree/montecarlo.hpp"
#include "pglfree/spectral.hpp"
#include "pglfree/words.hpp"

namespace pglfree::cli {

using io::Json;

int exit_code_for(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::SearchExhausted:
    case ErrorKind::TargetMissed:
    case ErrorKind::GenerationFailure:
    case ErrorKind::CoveringViolation:
    case ErrorKind::InconsistentCovering:
    case ErrorKind::MissingCertificate: return kFailure;
    case ErrorKind::BudgetExceeded:
    case ErrorKind::TooLarge: return kBudget;
    case ErrorKind::Format:
    case ErrorKind::Io: return kIoFormat;
    case ErrorKind::SingularMatrix:
    case ErrorKind::ModulusMismatch:
    case ErrorKind::NotPrime:
    case ErrorKind::EmptyWord:
    case ErrorKind::NotReduced:
    case ErrorKind::IndexOutOfRange:
    case ErrorKind::TooFewGenerators:
    case ErrorKind::InvalidArgument: return kUsage;
  }
  return kUsage;
}

std::vector<PglElement> parse_generators(std::string_view text, std::uint32_t p) {
  if (!is_prime(p)) throw Error(ErrorKind::NotPrime, std::to_string(p));
  std::vector<PglElement> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = std::min(text.find(';', start), text.size());
    std::string part(text.substr(start, end - start));
    for (char& c : part) {
      if (c == ',') c = ' ';
    }
    std::istringstream is(part);
    std::vector<std::int64_t> v;
    std::int64_t x = 0;
    while (is >> x) v.push_back(x);
    if (!is.eof()) throw Error(ErrorKind::InvalidArgument, "bad matrix entry in '" + part + "'");
    if (v.size() == 4) {
      out.push_back(canonicalize(Mat2::make(p, v[0], v[1], v[2], v[3])));
    } else if (!v.empty()) {
      throw Error(ErrorKind::InvalidArgument, "a matrix needs 4 entries: '" + part + "'");
    }
    start = end + 1;
  }
  if (out.empty()) throw Error(ErrorKind::InvalidArgument, "no generators given");
  return out;
}

namespace {

struct Globals {
  std::uint64_t seed = 0;
  int threads = 0;
  std::uint64_t word_budget = kDefaultWordBudget;
  std::uint64_t dense_limit = kDefaultDenseLimit;
  std::string out;
};

TowerOptions tower_options(const Globals& g) {
  TowerOptions opts;
  opts.relations.word_budget = g.word_budget;
  opts.gap.dense_limit = g.dense_limit;
  return opts;
}

Json globals_echo(const Globals& g) {
  return Json{{"seed", g.seed}, {"word_budget", g.word_budget}, {"dense_limit", g.dense_limit}};
}

void emit(const io::CertificateFile& file, const std::string& path, std::ostream& out) {
  const std::string text = io::serialize(file);
  if (path.empty()) {
    out << text;
  } else {
    io::write_atomic(path, text);
  }
}

Json history_json(const std::vector<AttemptRecord>& h) {
  Json a = Json::array();
  for (const auto& r : h) a.push_back(io::to_json(r));
  return a;
}

void add(VerifyReport& rep, std::uint32_t level, std::string name, bool ok, std::string detail = {}) {
  rep.checks.push_back({level, std::move(name), ok, std::move(detail)});
}

void check_gap(VerifyReport& rep, std::uint32_t level, const GapCertificate& gap, const TowerOptions& opts) {
  try {
    const GapRecheck rc = recheck_gap(gap, opts.gap.dense_limit, opts.parallel);
    add(rep, level, "gap", rc.ok, std::string(to_string(gap.verdict)) + ", " + rc.detail);
  } catch (const Error& e) {
    add(rep, level, "gap", false, e.what());
  }
}

void check_relations(VerifyReport& rep, std::uint32_t level, std::span<const PglElement> gens, std::uint32_t p,
                     const RelationReport& recorded, const TowerOptions& opts) {
  if (recorded.inconclusive) {
    add(rep, level, "relations", true, "inconclusive, nothing claimed");
    return;
  }
  RelationOptions ro = opts.relations;
  ro.method = recorded.method;
  const RelationReport now = check_no_relations(gens, recorded.max_length, *table_for(p), ro);
  const bool ok = !now.inconclusive && now.witness.has_value() == recorded.witness.has_value() &&
                  (!now.witness || now.witness == recorded.witness);
  add(rep, level, "relations", ok,
      "ell=" + std::to_string(recorded.max_length) + (now.witness ? " witness " + now.witness->to_string() : ""));
}

void verify_search(VerifyReport& rep, const Json& body, const TowerOptions& opts) {
  if (body.at("status") != "found") {
    add(rep, 0, "search", true, "exhausted, nothing claimed");
    return;
  }
  const BaseSetResult b = io::base_set_from_json(body.at("result"));
  add(rep, 1, "gap-binding", b.gap.p == b.p && b.gap.gens == b.gens && b.gap.verdict == GapVerdict::certified);
  check_gap(rep, 1, b.gap, opts);
  check_relations(rep, 1, b.gens, b.p, b.relations, opts);
  add(rep, 1, "relations-clean", b.relations.clean());
  const auto gen = generation_records(*table_for(b.p), b.gens, 0, opts.generation_dense_limit);
  add(rep, 1, "generation", gen == b.generation && !gen.empty() && gen.front().generates,
      "closure " + std::to_string(gen.empty() ? 0 : gen.front().closure));
}

void verify_trials(VerifyReport& rep, const Json& body, bool girth) {
  std::uint32_t row = 0;
  for (const auto& r : body.at("rows")) {
    ++row;
    const auto p = r.at("p").get<std::uint32_t>();
    const auto k = r.at("k").get<std::uint32_t>();
    const auto trials = r.at("trials").get<std::uint32_t>();
    const auto outcomes = r.at("outcomes").get<std::string>();
    std::uint32_t ones = 0;
    for (char c : outcomes) ones += c == '1';
    const double bound = girth ? girth_bound(p, k, r.at("ell").get<std::uint32_t>())
                               : alon_roichman_bound(order_formula(p), k, io::real_from(r.at("eps")));
    const bool ok = outcomes.size() == trials && ones == r.at("successes").get<std::uint32_t>() &&
                    io::real(bound) == r.at("theoretical_bound");
    add(rep, row, "trial-row", ok, "p=" + std::to_string(p) + " k=" + std::to_string(k));
  }
}

std::vector<ExactCount> wordcount_rows(const std::vector<ReducedWord>& words, const std::vector<std::uint32_t>& primes,
                                       std::uint32_t k, const CountBudget& budget) {
  std::vector<ExactCount> rows;
  for (auto p : primes) {
    for (const auto& w : words) rows.push_back(exact_word_count(w, p, std::max(k, w.symbol_count()), budget));
  }
  return rows;
}

void verify_wordcount(VerifyReport& rep, const Json& body, const Json& config) {
  CountBudget budget;
  budget.lift = config.at("lift").get<bool>();
  std::uint32_t row = 0;
  for (const auto& r : body.at("rows")) {
    ++row;
    const ReducedWord w = io::word_from_json(r.at("word"));
    const ExactCount now =
        exact_word_count(w, r.at("p").get<std::uint32_t>(), r.at("k").get<std::uint32_t>(), budget);
    add(rep, row, "word-count", io::to_json(now) == r, w.to_string());
  }
}

}  // namespace

VerifyReport verify_file(const io::CertificateFile& file, const TowerOptions& opts) {
  VerifyReport rep;
  try {
    if (file.kind == "tower") {
      return reverify(io::tower_state_from_json(file.body.at("tower")), opts);
    }
    if (file.kind == "profile") {
      const TowerState t = io::tower_state_from_json(file.body.at("tower"));
      rep = reverify(t, opts);
      const C0Profile prof = c0_profile(TowerMeasure{&t, false});
      add(rep, 0, "profile", io::to_json(prof) == file.body.at("profile"), std::to_string(prof.rows.size()) + " rows");
      return rep;
    }
    if (file.kind == "search") {
      verify_search(rep, file.body, opts);
    } else if (file.kind == "gap") {
      check_gap(rep, 1, io::gap_certificate_from_json(file.body.at("certificate")), opts);
    } else if (file.kind == "girth") {
      const auto p = file.body.at("p").get<std::uint32_t>();
      const auto gens = io::parse_element_block(file.body.at("gens"));
      check_relations(rep, 1, gens, p, io::relation_report_from_json(file.body.at("report")), opts);
    } else if (file.kind == "mc-gap" || file.kind == "mc-girth") {
      verify_trials(rep, file.body, file.kind == "mc-girth");
    } else if (file.kind == "mc-wordcount") {
      verify_wordcount(rep, file.body, file.config);
    } else {
      throw Error(ErrorKind::Format, "unknown certificate kind '" + file.kind + "'");
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorKind::Format, std::string("malformed ") + file.kind + " record: " + e.what());
  }
  return rep;
}

namespace {

struct GensInput {
  std::uint32_t p = 0;
  std::string gens;
  std::string gens_from;
};

void add_gens_options(CLI::App* sub, GensInput& in) {
  sub->add_option("--p", in.p, "prime modulus");
  sub->add_option("--gens", in.gens, "generators as a,b,c,d;a,b,c,d;...");
  sub->add_option("--gens-from", in.gens_from, "take p and the generators from a search certificate")
      ;
}

std::pair<std::uint32_t, std::vector<PglElement>> resolve_gens(const GensInput& in) {
  if (!in.gens_from.empty()) {
    const auto file = io::parse_certificate(io::read_file(in.gens_from));
    if (file.kind != "search" || file.body.at("status") != "found") {
      throw Error(ErrorKind::Format, in.gens_from + " holds no base set");
    }
    const BaseSetResult b = io::base_set_from_json(file.body.at("result"));
    return {b.p, b.gens};
  }
  if (in.gens.empty() || in.p == 0) throw Error(ErrorKind::InvalidArgument, "need --p and --gens, or --gens-from");
  return {in.p, parse_generators(in.gens, in.p)};
}

Json gens_echo(std::uint32_t p, const std::vector<PglElement>& gens) {
  Json a = Json::array();
  for (const auto& g : gens) a.push_back(g.to_string());
  return Json{{"p", p}, {"gens", a}};
}

struct SearchArgs {
  double eps = 0;
  std::uint32_t k0 = 0, p0 = 0, ell = 0;
  std::uint32_t p_max = 13, retries = 8, k_growth = 2;
};

int cmd_search(const SearchArgs& a, const Globals& g, std::ostream& out, std::ostream& err) {
  const TowerOptions opts = tower_options(g);
  io::CertificateFile file;
  file.kind = "search";
  file.config = globals_echo(g);
  file.config.update(Json{{"eps", a.eps}, {"k0", a.k0}, {"p0", a.p0}, {"ell", a.ell},
                          {"p_max", a.p_max}, {"retries", a.retries}, {"k_growth", a.k_growth}});
  LemmaQuery q{a.eps, a.k0, a.p0, a.ell, a.p_max, a.retries, a.k_growth};
  try {
    const BaseSetResult b = lemma_search(q, opts, g.seed);
    file.body = Json{{"status", "found"}, {"result", io::to_json(b)}};
    emit(file, g.out, out);
    err << "found k=" << b.gens.size() << " at p=" << b.p << " after " << b.history.size() << " attempts\n";
    return kOk;
  } catch (const SearchExhaustedError& e) {
    file.body = Json{{"status", "exhausted"}, {"history", history_json(e.history())}};
    emit(file, g.out, out);
    err << e.what() << '\n';
    return kFailure;
  }
}

struct GapArgs {
  GensInput in;
  double eps = 0;
  std::string method = "auto";
  std::optional<std::uint32_t> trace_order;
  std::uint32_t max_trace_order = 48;
};

int cmd_certify_gap(const GapArgs& a, const Globals& g, std::ostream& out, std::ostream& err) {
  const auto [p, gens] = resolve_gens(a.in);
  GapOptions go;
  go.method = gap_method_from_string(a.method);
  go.trace_order = a.trace_order;
  go.max_trace_order = a.max_trace_order;
  go.dense_limit = g.dense_limit;
  const GapCertificate cert = certify_gap(*table_for(p), gens, a.eps, go, g.seed);
  io::CertificateFile file;
  file.kind = "gap";
  file.config = globals_echo(g);
  file.config.update(gens_echo(p, gens));
  file.config.update(Json{{"eps", a.eps}, {"method", a.method}, {"max_trace_order", a.max_trace_order},
                          {"trace_order", a.trace_order ? Json(*a.trace_order) : Json(nullptr)}});
  file.body = Json{{"certificate", io::to_json(cert)}};
  emit(file, g.out, out);
  err << to_string(cert.verdict) << " (" << cert.method << ")";
  if (cert.certified_upper()) err << " upper " << *cert.certified_upper();
  err << " lower " << cert.estimate.lower_bound << '\n';
  if (cert.verdict == GapVerdict::certified) return kOk;
  return cert.verdict == GapVerdict::refuted ? kFailure : kBudget;
}

struct GirthArgs {
  GensInput in;
  std::uint32_t ell = 0;
  std::string method = "dfs";
};

int cmd_certify_girth(const GirthArgs& a, const Globals& g, std::ostream& out, std::ostream& err) {
  const auto [p, gens] = resolve_gens(a.in);
  RelationOptions ro;
  ro.method = relation_method_from_string(a.method);
  ro.word_budget = g.word_budget;
  const RelationReport rep = check_no_relations(gens, a.ell, *table_for(p), ro);
  io::CertificateFile file;
  file.kind = "girth";
  file.config = globals_echo(g);
  file.config.update(gens_echo(p, gens));
  file.config.update(Json{{"ell", a.ell}, {"method", a.method}});
  file.body = Json{{"p", p}, {"gens", io::element_block(gens)}, {"report", io::to_json(rep)}};
  emit(file, g.out, out);
  if (rep.witness) {
    err << "relation " << rep.witness->to_string() << '\n';
    return kFailure;
  }
  if (rep.inconclusive) {
    err << "word budget exhausted after " << rep.words_checked << " words\n";
    return kBudget;
  }
  err << "no relation of length <= " << a.ell << " (" << rep.words_checked << " words)\n";
  return kOk;
}

struct TowerArgs {
  std::vector<std::string> eps = {"0.9", "0.7"};
  std::vector<std::uint32_t> ell = {2, 3};
  std::uint32_t p_min = 5, p_max = 13, retries = 8, k_growth = 2;
  std::uint32_t k2_min = 0;
  std::string target = "1";
  bool paper_mode = false;
  std::optional<std::uint32_t> levels;
  std::string resume;
  std::uint64_t direct_limit = 100'000;
  bool no_direct = false;
};

Schedule schedule_from(const TowerArgs& a) {
  Schedule s;
  s.paper_mode = a.paper_mode;
  s.p_min = a.p_min;
  s.p_max = a.p_max;
  s.retry_budget = a.retries;
  s.k_growth = a.k_growth;
  s.k2_min = a.k2_min;
  s.target = Ratio::parse(a.target);
  if (a.paper_mode) {
    const std::uint32_t n = a.levels.value_or(1);
    for (std::uint32_t i = 1; i <= n; ++i) {
      s.eps.push_back(Ratio::make(1, 4ULL * i));
      s.ell.push_back(3 * i);
    }
    return s;
  }
  if (a.eps.size() != a.ell.size()) throw Error(ErrorKind::InvalidArgument, "eps and ell schedules differ in length");
  for (const auto& e : a.eps) s.eps.push_back(Ratio::parse(e));
  s.ell = a.ell;
  if (a.levels) {
    if (*a.levels > s.eps.size()) throw Error(ErrorKind::InvalidArgument, "schedule has fewer levels than requested");
    s.eps.resize(*a.levels);
    s.ell.resize(*a.levels);
  }
  return s;
}

io::CertificateFile tower_file(const TowerState& t, const Globals& g, const TowerOptions& opts) {
  io::CertificateFile file;
  file.kind = "tower";
  file.config = globals_echo(g);
  file.config["seed"] = t.seed;
  file.config.update(Json{{"direct", opts.direct}, {"direct_limit", opts.direct_limit}});
  file.body = Json{{"tower", io::to_json(t)}};
  return file;
}

int cmd_tower_build(const TowerArgs& a, const CLI::App& sub, Globals g, std::ostream& out, std::ostream& err) {
  TowerOptions opts = tower_options(g);
  opts.direct = !a.no_direct;
  opts.direct_limit = a.direct_limit;
  TowerState state;
  if (!a.resume.empty()) {
    const auto file = io::parse_certificate(io::read_file(a.resume));
    if (file.kind != "tower") throw Error(ErrorKind::Format, a.resume + " is not a tower state");
    state = io::tower_state_from_json(file.body.at("tower"));
    if (g.out.empty()) g.out = a.resume;
    const bool reschedule = sub.count("--eps-schedule") || sub.count("--ell-schedule") || sub.count("--levels") ||
                            sub.count("--paper-mode");
    if (reschedule) {
      Schedule s = schedule_from(a);
      for (std::size_t i = 0; i < state.specs.size(); ++i) {
        if (i >= s.levels() || level_spec(s, static_cast<std::uint32_t>(i + 1),
                                          i == 0 ? 1 : state.levels[i - 1].elements.size()) != state.specs[i]) {
          throw Error(ErrorKind::InvalidArgument, "new schedule disagrees with built level " + std::to_string(i + 1));
        }
      }
      state.schedule = s;
    }
    g.seed = state.seed;
  } else {
    state.seed = g.seed;
    state.schedule = schedule_from(a);
  }
  const std::uint32_t want = std::max(state.schedule.levels(), state.schedule.paper_mode ? 1u : 0u);
  while (state.levels.size() < want) {
    const auto n = static_cast<std::uint32_t>(state.levels.size() + 1);
    const std::uint64_t k1 = n == 1 ? 1 : state.levels.back().elements.size();
    try {
      state = extend_tower(state, level_spec(state.schedule, n, k1), opts);
    } catch (const SearchExhaustedError& e) {
      io::CertificateFile file = tower_file(state, g, opts);
      file.body["failure"] = Json{{"level", n}, {"message", e.what()}, {"history", history_json(e.history())}};
      emit(file, g.out, out);
      err << e.what() << '\n';
      return kFailure;
    }
    const LevelCertificate& c = state.certificates.back();
    char buf[160];
    std::snprintf(buf, sizeof buf, "level %u: p=%u k=%zu |F|=%zu bound %.9f%s\n", n, state.levels.back().p,
                  state.levels.back().base_gens.size(), state.levels.back().elements.size(), c.bounds.level_bound,
                  c.direct ? (" direct " + std::to_string(c.direct->lower_bound)).c_str() : "");
    err << buf;
    if (!g.out.empty()) emit(tower_file(state, g, opts), g.out, out);
  }
  if (g.out.empty()) emit(tower_file(state, g, opts), g.out, out);
  return kOk;
}

int cmd_tower_verify(const std::string& path, const Globals& g, std::ostream& out) {
  const auto file = io::parse_certificate(io::read_file(path));
  const VerifyReport rep = verify_file(file, tower_options(g));
  for (const auto& c : rep.checks) {
    out << "level " << c.level << '\t' << c.name << '\t' << (c.ok ? "ok" : "FAILED");
    if (!c.detail.empty()) out << '\t' << c.detail;
    out << '\n';
  }
  out << file.kind << ": " << (rep.ok() ? "verified" : "FAILED") << " (" << rep.checks.size() << " checks)\n";
  return rep.ok() ? kOk : kFailure;
}

int cmd_measure_profile(const std::string& path, bool symmetrized, const Globals& g, std::ostream& out,
                        std::ostream& err) {
  const auto in = io::parse_certificate(io::read_file(path));
  if (in.kind != "tower") throw Error(ErrorKind::Format, path + " is not a tower state");
  const TowerState t = io::tower_state_from_json(in.body.at("tower"));
  const TowerMeasure m{&t, false};
  const C0Profile prof = c0_profile(m);
  bool ok = true;
  Json levels = Json::array();
  const NonAtomicReport na = non_atomic_check(m);
  for (std::uint32_t n = 1; n <= t.levels.size(); ++n) {
    const bool marginal = marginal_consistency(m, n);
    std::optional<bool> sym;
    try {
      sym = self_adjoint_check(symmetrized ? symmetrize(m) : m, n);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::TooLarge) throw;
    }
    ok = ok && marginal && (!symmetrized || !sym || *sym);
    levels.push_back(Json{{"n", n},
                          {"marginal", marginal},
                          {"max_mass", na.max_mass[n - 1].str()},
                          {"self_adjoint", sym ? Json(*sym) : Json(nullptr)}});
  }
  io::CertificateFile file;
  file.kind = "profile";
  file.config = Json{{"symmetrized", symmetrized}, {"source_checksum", io::crc32(in.body.dump())}};
  file.body = Json{{"tower", in.body.at("tower")},
                   {"profile", io::to_json(prof)},
                   {"levels", levels},
                   {"non_atomic", na.non_atomic}};
  if (!g.out.empty()) emit(file, g.out, out);
  out << profile_table(prof);
  err << (na.non_atomic ? "non-atomic" : "atomic at some level") << ", marginals "
      << (ok ? "consistent" : "INCONSISTENT") << '\n';
  return ok ? kOk : kFailure;
}

struct McArgs {
  std::vector<std::uint32_t> p = {5};
  std::vector<std::uint32_t> k = {10};
  double eps = 0.8;
  std::uint32_t ell = 2;
  std::uint32_t trials = 100;
};

int cmd_mc(const McArgs& a, bool girth, const Globals& g, std::ostream& out) {
  io::CertificateFile file;
  file.kind = girth ? "mc-girth" : "mc-gap";
  file.config = globals_echo(g);
  file.config.update(Json{{"p", a.p}, {"k", a.k}, {"trials", a.trials}});
  file.config[girth ? "ell" : "eps"] = girth ? Json(a.ell) : Json(a.eps);
  Json rows = Json::array();
  out << trial_header();
  for (auto p : a.p) {
    for (auto k : a.k) {
      TrialConfig cfg{p, k, a.eps, a.ell, a.trials, g.seed};
      TrialResult r;
      if (girth) {
        RelationOptions ro;
        ro.word_budget = g.word_budget;
        r = girth_trials(cfg, ro);
      } else {
        GapOptions go;
        go.dense_limit = g.dense_limit;
        r = ar_trials(cfg, go);
      }
      out << trial_row(r);
      rows.push_back(io::to_json(r));
    }
  }
  file.body = Json{{"rows", rows}};
  if (!g.out.empty()) emit(file, g.out, out);
  return kOk;
}

struct WordArgs {
  std::vector<std::uint32_t> p = {2, 3};
  std::uint32_t k = 0;
  std::vector<std::string> words;
  std::uint32_t max_length = 0;
  bool no_lift = false;
  std::uint64_t tuple_budget = 1'000'000;
};

int cmd_wordcount(const WordArgs& a, const Globals& g, std::ostream& out) {
  std::vector<ReducedWord> words;
  for (const auto& w : a.words) words.push_back(ReducedWord::parse(w));
  if (a.max_length > 0) {
    if (a.k == 0) throw Error(ErrorKind::InvalidArgument, "--max-length needs --k");
    for (auto& w : all_reduced_words(a.k, a.max_length)) words.push_back(std::move(w));
  }
  if (words.empty()) throw Error(ErrorKind::InvalidArgument, "give --word or --max-length");
  CountBudget budget;
  budget.lift = !a.no_lift;
  budget.tuples = a.tuple_budget;
  const auto rows = wordcount_rows(words, a.p, a.k, budget);
  io::CertificateFile file;
  file.kind = "mc-wordcount";
  file.config = globals_echo(g);
  file.config.update(Json{{"p", a.p}, {"k", a.k}, {"lift", budget.lift}, {"max_length", a.max_length}});
  Json body = Json::array();
  bool ok = true;
  out << "word\tp\tk\tcount_u\ttotal\test_bound\tis_law\testimate\tu_bound\tlifted\n";
  for (const auto& c : rows) {
    const bool row_ok = c.u_bound_ok && c.est_ok && c.covering_ok && c.w_bound_ok;
    ok = ok && row_ok;
    out << c.word.to_string() << '\t' << c.p << '\t' << c.k << '\t' << c.count_u << '\t' << c.total << '\t'
        << c.est_bound.convert_to<double>() << '\t' << (c.is_law ? "law" : "-") << '\t'
        << (c.est_ok ? "ok" : "VIOLATED") << '\t' << (c.u_bound_ok ? "ok" : "VIOLATED") << '\t'
        << (c.lifted ? (c.covering_ok && c.w_bound_ok ? "ok" : "VIOLATED") : "-") << '\n';
    body.push_back(io::to_json(c));
  }
  file.body = Json{{"rows", body}};
  if (!g.out.empty()) emit(file, g.out, out);
  return ok ? kOk : kFailure;
}

void add_globals(CLI::App& app, Globals& g) {
  app.add_option("--seed", g.seed, "64-bit seed");
  app.add_option("--threads", g.threads, "OpenMP threads (0: runtime default)")->envname("PGLFREE_THREADS");
  app.add_option("--word-budget", g.word_budget, "words examined per relation check")
      ->envname("PGLFREE_WORD_BUDGET");
  app.add_option("--dense-limit", g.dense_limit, "largest group order for the dense oracle")
      ->envname("PGLFREE_DENSE_LIMIT");
  app.add_option("--out", g.out, "output file (default: stdout)");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Certified free sets in products of PGL2(Z/pZ)", "pglfree"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  app.set_config("--config", "", "key=value file; flags on the command line take precedence");
  app.allow_config_extras(CLI::config_extras_mode::error);
  Globals g;
  add_globals(app, g);

  SearchArgs sa;
  auto* search = app.add_subcommand("search", "find a generating set with spectral gap and no short relations");
  search->add_option("--eps", sa.eps, "gap threshold")->required();
  search->add_option("--k0", sa.k0, "minimum set size")->required();
  search->add_option("--p0", sa.p0, "smallest prime")->required();
  search->add_option("--ell", sa.ell, "relation length")->required();
  search->add_option("--p-max", sa.p_max, "largest prime")->capture_default_str();
  search->add_option("--retries", sa.retries, "samples per (p, k)")->capture_default_str();
  search->add_option("--k-growth", sa.k_growth, "increments of k per prime")->capture_default_str();

  GapArgs ga;
  auto* gap = app.add_subcommand("certify-gap", "certify or refute ||pi(F)|| <= eps on nontrivial irreducibles");
  add_gens_options(gap, ga.in);
  gap->add_option("--eps", ga.eps, "threshold")->required();
  gap->add_option("--method", ga.method, "auto, trace, dense or power")->capture_default_str();
  gap->add_option("--trace-order", ga.trace_order, "fixed trace moment m");
  gap->add_option("--max-trace-order", ga.max_trace_order, "escalation ceiling")->capture_default_str();

  GirthArgs gi;
  auto* girth = app.add_subcommand("certify-girth", "check for relations of length <= ell");
  add_gens_options(girth, gi.in);
  girth->add_option("--ell", gi.ell, "relation length")->required();
  girth->add_option("--method", gi.method, "dfs or mitm")->capture_default_str();

  TowerArgs ta;
  auto* build = app.add_subcommand("tower-build", "build (or resume) the tower F_1, F_2, ...");
  build->add_option("--eps-schedule", ta.eps, "per-level eps")->delimiter(',')->capture_default_str();
  build->add_option("--ell-schedule", ta.ell, "per-level relation length")->delimiter(',')->capture_default_str();
  build->add_option("--p-min", ta.p_min)->capture_default_str();
  build->add_option("--p-max", ta.p_max)->capture_default_str();
  build->add_option("--retries", ta.retries)->capture_default_str();
  build->add_option("--k-growth", ta.k_growth)->capture_default_str();
  build->add_option("--k2-min", ta.k2_min, "lower bound on k2 beyond the structural minimum");
  build->add_option("--target", ta.target, "desk-mode level target")->capture_default_str();
  build->add_flag("--paper-mode", ta.paper_mode, "eps = 1/(4n), ell = 3n, target 1/n");
  build->add_option("--levels", ta.levels, "number of levels");
  build->add_option("--resume", ta.resume, "continue from a tower state file");
  build->add_option("--direct-limit", ta.direct_limit, "largest |K_n| for the direct check")->capture_default_str();
  build->add_flag("--no-direct", ta.no_direct, "skip the direct check");

  std::string verify_in;
  auto* verify = app.add_subcommand("tower-verify", "re-check every record of a certificate file");
  verify->add_option("--in,in", verify_in, "certificate file")->required();

  std::string profile_in;
  bool symmetrized = true;
  auto* profile = app.add_subcommand("measure-profile", "c0 profile and measure checks of a tower");
  profile->add_option("--in,in", profile_in, "tower state file")->required();
  profile->add_flag("!--plain", symmetrized, "check the unsymmetrized operators");

  McArgs ma;
  auto* mc_gap = app.add_subcommand("mc-gap", "sampling experiment for the spectral-gap bound");
  mc_gap->add_option("--p", ma.p)->delimiter(',')->capture_default_str();
  mc_gap->add_option("--k", ma.k)->delimiter(',')->capture_default_str();
  mc_gap->add_option("--eps", ma.eps)->capture_default_str();
  mc_gap->add_option("--trials", ma.trials)->capture_default_str();
  McArgs mg;
  auto* mc_girth = app.add_subcommand("mc-girth", "sampling experiment for the girth bound");
  mc_girth->add_option("--p", mg.p)->delimiter(',')->capture_default_str();
  mc_girth->add_option("--k", mg.k)->delimiter(',')->capture_default_str();
  mc_girth->add_option("--ell", mg.ell)->capture_default_str();
  mc_girth->add_option("--trials", mg.trials)->capture_default_str();

  WordArgs wa;
  auto* wc = app.add_subcommand("mc-wordcount", "exhaustive word-map counts against the probability bounds");
  wc->add_option("--p", wa.p)->delimiter(',')->capture_default_str();
  wc->add_option("--k", wa.k, "tuple size (default: symbols in the word)");
  wc->add_option("--word", wa.words, "words like abAB (capital = inverse)")->delimiter(',');
  wc->add_option("--max-length", wa.max_length, "all reduced words over --k symbols up to this length");
  wc->add_option("--tuple-budget", wa.tuple_budget)->capture_default_str();
  wc->add_flag("--no-lift", wa.no_lift, "skip the matrix-lift counts");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  if (g.threads > 0) omp_set_num_threads(g.threads);
  try {
    if (search->parsed()) return cmd_search(sa, g, out, err);
    if (gap->parsed()) return cmd_certify_gap(ga, g, out, err);
    if (girth->parsed()) return cmd_certify_girth(gi, g, out, err);
    if (build->parsed()) return cmd_tower_build(ta, *build, g, out, err);
    if (verify->parsed()) return cmd_tower_verify(verify_in, g, out);
    if (profile->parsed()) return cmd_measure_profile(profile_in, symmetrized, g, out, err);
    if (mc_gap->parsed()) return cmd_mc(ma, false, g, out);
    if (mc_girth->parsed()) return cmd_mc(mg, true, g, out);
    if (wc->parsed()) return cmd_wordcount(wa, g, out);
  } catch (const Error& e) {
    err << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const Json::exception& e) {
    err << "Format: " << e.what() << '\n';
    return kIoFormat;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "Io: " << e.what() << '\n';
    return kIoFormat;
  }
  return kUsage;
}

}  // namespace pglfree::cli
