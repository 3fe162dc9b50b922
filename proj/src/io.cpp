#include "pglfree/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <boost/crc.hpp>

namespace pglfree::io {

namespace {

[[noreturn]] void format_error(const std::string& what) { throw Error(ErrorKind::Format, what); }

const Json& field(const Json& j, const char* key) {
  if (!j.is_object()) format_error(std::string("expected an object around '") + key + "'");
  const auto it = j.find(key);
  if (it == j.end()) format_error(std::string("missing field '") + key + "'");
  return *it;
}

template <class T>
T get(const Json& j, const char* key) {
  try {
    return field(j, key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    format_error(std::string("bad field '") + key + "': " + e.what());
  }
}

Json num(double x) { return real(x); }

double get_double(const Json& j, const char* key) {
  const Json& v = field(j, key);
  try {
    return real_from(v);
  } catch (const Error&) {
    format_error(std::string("bad number '") + key + "'");
  }
}

Json opt_num(const std::optional<double>& x) { return x ? num(*x) : Json(nullptr); }

std::optional<double> get_opt_double(const Json& j, const char* key) {
  if (field(j, key).is_null()) return std::nullopt;
  return get_double(j, key);
}

std::string hex32(std::uint32_t v) {
  char buf[9];
  std::snprintf(buf, sizeof buf, "%08x", v);
  return buf;
}

template <class T, class F>
Json array_of(const std::vector<T>& xs, F&& f) {
  Json a = Json::array();
  for (const auto& x : xs) a.push_back(f(x));
  return a;
}

template <class F>
auto vector_from(const Json& j, const char* key, F&& f) {
  const Json& a = field(j, key);
  if (!a.is_array()) format_error(std::string("field '") + key + "' is not an array");
  std::vector<decltype(f(a[0]))> out;
  out.reserve(a.size());
  for (const auto& x : a) out.push_back(f(x));
  return out;
}

}  // namespace

Json real(double x) {
  if (std::isfinite(x)) return x;
  return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
}

double real_from(const Json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    if (s == "nan") return NAN;
  }
  format_error("not a number: " + j.dump());
}

std::uint32_t crc32(std::span<const std::uint8_t> bytes) noexcept {
  boost::crc_32_type crc;
  crc.process_bytes(bytes.data(), bytes.size());
  return crc.checksum();
}

std::uint32_t crc32(std::string_view text) noexcept {
  boost::crc_32_type crc;
  crc.process_bytes(text.data(), text.size());
  return crc.checksum();
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * bytes.size());
  for (auto b : bytes) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 15]);
  }
  return out;
}

std::vector<std::uint8_t> from_hex(std::string_view hex) {
  if (hex.size() % 2) format_error("odd-length hex string");
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    format_error(std::string("bad hex digit '") + c + "'");
  };
  std::vector<std::uint8_t> out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<std::uint8_t>(nibble(hex[2 * i]) << 4 | nibble(hex[2 * i + 1]));
  }
  return out;
}

namespace {

Json block_from_bytes(const std::vector<std::uint8_t>& bytes, std::size_t count, std::size_t width) {
  return Json{{"encoding", "pgl2-le32x5"},
              {"count", count},
              {"width", width},
              {"hex", to_hex(bytes)},
              {"crc32", hex32(crc32(bytes))}};
}

std::vector<std::uint8_t> bytes_from_block(const Json& j, std::size_t& count, std::size_t& width) {
  if (get<std::string>(j, "encoding") != "pgl2-le32x5") format_error("unknown element encoding");
  count = get<std::size_t>(j, "count");
  width = get<std::size_t>(j, "width");
  auto bytes = from_hex(get<std::string>(j, "hex"));
  if (hex32(crc32(bytes)) != get<std::string>(j, "crc32")) format_error("element block checksum mismatch");
  if (bytes.size() != count * width * kEncodedSize) format_error("element block has the wrong length");
  return bytes;
}

}  // namespace

Json element_block(std::span<const PglElement> elems) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(elems.size() * kEncodedSize);
  for (const auto& g : elems) {
    const auto e = g.encode();
    bytes.insert(bytes.end(), e.begin(), e.end());
  }
  return block_from_bytes(bytes, elems.size(), 1);
}

std::vector<PglElement> parse_element_block(const Json& j) {
  std::size_t count = 0, width = 0;
  const auto bytes = bytes_from_block(j, count, width);
  if (width != 1) format_error("expected an element block of width 1");
  std::vector<PglElement> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(PglElement::decode(std::span(bytes).subspan(i * kEncodedSize, kEncodedSize)));
  }
  return out;
}

Json tuple_block(std::span<const TupleElement> elems) {
  const std::size_t width = elems.empty() ? 0 : elems.front().size();
  std::vector<std::uint8_t> bytes;
  bytes.reserve(elems.size() * width * kEncodedSize);
  for (const auto& t : elems) {
    if (t.size() != width) throw Error(ErrorKind::InvalidArgument, "tuples of mixed width");
    for (const auto& g : t.coords) {
      const auto e = g.encode();
      bytes.insert(bytes.end(), e.begin(), e.end());
    }
  }
  return block_from_bytes(bytes, elems.size(), width);
}

std::vector<TupleElement> parse_tuple_block(const Json& j) {
  std::size_t count = 0, width = 0;
  const auto bytes = bytes_from_block(j, count, width);
  std::vector<TupleElement> out(count);
  std::size_t off = 0;
  for (auto& t : out) {
    t.coords.reserve(width);
    for (std::size_t c = 0; c < width; ++c, off += kEncodedSize) {
      t.coords.push_back(PglElement::decode(std::span(bytes).subspan(off, kEncodedSize)));
    }
  }
  return out;
}

Json to_json(const ReducedWord& w) {
  Json a = Json::array();
  for (const auto& l : w.letters()) a.push_back(Json::array({l.gen, static_cast<int>(l.exp)}));
  return a;
}

ReducedWord word_from_json(const Json& j) {
  if (!j.is_array()) format_error("word is not an array");
  std::vector<Letter> letters;
  try {
    for (const auto& pair : j) {
      if (!pair.is_array() || pair.size() != 2) format_error("word letter is not a (gen, exp) pair");
      letters.push_back(Letter{pair[0].get<std::uint32_t>(), static_cast<std::int8_t>(pair[1].get<int>())});
    }
    return ReducedWord::from_letters(std::move(letters));
  } catch (const nlohmann::json::exception& e) {
    format_error(std::string("bad word: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Format) throw;
    format_error(std::string("bad word: ") + e.what());
  }
}

Json to_json(const RelationReport& r) {
  return Json{{"max_length", r.max_length},
              {"words_checked", r.words_checked},
              {"witness", r.witness ? to_json(*r.witness) : Json(nullptr)},
              {"method", to_string(r.method)},
              {"inconclusive", r.inconclusive}};
}

RelationReport relation_report_from_json(const Json& j) {
  RelationReport r;
  r.max_length = get<std::uint32_t>(j, "max_length");
  r.words_checked = get<std::uint64_t>(j, "words_checked");
  if (!field(j, "witness").is_null()) r.witness = word_from_json(field(j, "witness"));
  try {
    r.method = relation_method_from_string(get<std::string>(j, "method"));
  } catch (const Error& e) {
    format_error(e.what());
  }
  r.inconclusive = get<bool>(j, "inconclusive");
  return r;
}

Json to_json(const NormEstimate& e) {
  return Json{{"lower_bound", num(e.lower_bound)}, {"certified_upper", opt_num(e.certified_upper)},
              {"trace_order", e.trace_order},      {"iterations", e.iterations},
              {"residual", num(e.residual)},       {"converged", e.converged}};
}

NormEstimate norm_estimate_from_json(const Json& j) {
  NormEstimate e;
  e.lower_bound = get_double(j, "lower_bound");
  e.certified_upper = get_opt_double(j, "certified_upper");
  e.trace_order = get<std::uint32_t>(j, "trace_order");
  e.iterations = get<std::uint32_t>(j, "iterations");
  e.residual = get_double(j, "residual");
  e.converged = get<bool>(j, "converged");
  return e;
}

Json to_json(const TraceBound& t) {
  return Json{{"m", t.m},
              {"c_m", t.c_m},
              {"numerator", t.numerator},
              {"denominator", t.denominator},
              {"upper", num(t.upper)},
              {"degenerate", t.degenerate}};
}

TraceBound trace_bound_from_json(const Json& j) {
  TraceBound t;
  t.m = get<std::uint32_t>(j, "m");
  t.c_m = get<std::string>(j, "c_m");
  t.numerator = get<std::string>(j, "numerator");
  t.denominator = get<std::string>(j, "denominator");
  t.upper = get_double(j, "upper");
  t.degenerate = get<bool>(j, "degenerate");
  return t;
}

Json to_json(const GapCertificate& c) {
  return Json{{"p", c.p},
              {"gens", element_block(c.gens)},
              {"eps", num(c.eps)},
              {"verdict", to_string(c.verdict)},
              {"method", c.method},
              {"estimate", to_json(c.estimate)},
              {"trace", c.trace ? to_json(*c.trace) : Json(nullptr)},
              {"dense_norm", opt_num(c.dense_norm)},
              {"seed", c.seed}};
}

GapCertificate gap_certificate_from_json(const Json& j) {
  GapCertificate c;
  c.p = get<std::uint32_t>(j, "p");
  c.gens = parse_element_block(field(j, "gens"));
  c.eps = get_double(j, "eps");
  try {
    c.verdict = gap_verdict_from_string(get<std::string>(j, "verdict"));
  } catch (const Error& e) {
    format_error(e.what());
  }
  c.method = get<std::string>(j, "method");
  c.estimate = norm_estimate_from_json(field(j, "estimate"));
  if (!field(j, "trace").is_null()) c.trace = trace_bound_from_json(field(j, "trace"));
  c.dense_norm = get_opt_double(j, "dense_norm");
  c.seed = get<std::uint64_t>(j, "seed");
  for (const auto& g : c.gens) {
    if (g.modulus() != c.p) format_error("gap certificate generator outside PGL2(Z/" + std::to_string(c.p) + ")");
  }
  return c;
}

Json to_json(const AttemptRecord& a) {
  return Json{{"p", a.p}, {"k", a.k}, {"attempt", a.attempt}, {"outcome", a.outcome}, {"detail", a.detail}};
}

AttemptRecord attempt_from_json(const Json& j) {
  return AttemptRecord{get<std::uint32_t>(j, "p"), get<std::uint32_t>(j, "k"), get<std::uint32_t>(j, "attempt"),
                       get<std::string>(j, "outcome"), get<std::string>(j, "detail")};
}

Json to_json(const GenerationRecord& g) {
  return Json{{"index", g.index}, {"closure", g.closure}, {"generates", g.generates}, {"dense_norm", opt_num(g.dense_norm)}};
}

GenerationRecord generation_from_json(const Json& j) {
  return GenerationRecord{get<std::uint32_t>(j, "index"), get<std::uint64_t>(j, "closure"), get<bool>(j, "generates"),
                          get_opt_double(j, "dense_norm")};
}

Json to_json(const Ratio& r) { return r.to_string(); }

Ratio ratio_from_json(const Json& j) {
  if (!j.is_string()) format_error("ratio is not a string");
  try {
    return Ratio::parse(j.get<std::string>());
  } catch (const Error& e) {
    format_error(e.what());
  }
}

Json to_json(const LevelSpec& s) {
  return Json{{"n", s.n},           {"p_min", s.p_min},
              {"p_max", s.p_max},   {"eps", to_json(s.eps)},
              {"ell", s.ell},       {"k2_min", s.k2_min},
              {"k_growth", s.k_growth}, {"retry_budget", s.retry_budget},
              {"paper_mode", s.paper_mode}, {"target", to_json(s.target)}};
}

LevelSpec level_spec_from_json(const Json& j) {
  LevelSpec s;
  s.n = get<std::uint32_t>(j, "n");
  s.p_min = get<std::uint32_t>(j, "p_min");
  s.p_max = get<std::uint32_t>(j, "p_max");
  s.eps = ratio_from_json(field(j, "eps"));
  s.ell = get<std::uint32_t>(j, "ell");
  s.k2_min = get<std::uint32_t>(j, "k2_min");
  s.k_growth = get<std::uint32_t>(j, "k_growth");
  s.retry_budget = get<std::uint32_t>(j, "retry_budget");
  s.paper_mode = get<bool>(j, "paper_mode");
  s.target = ratio_from_json(field(j, "target"));
  return s;
}

Json to_json(const Schedule& s) {
  return Json{{"paper_mode", s.paper_mode},
              {"eps", array_of(s.eps, [](const Ratio& r) { return to_json(r); })},
              {"ell", s.ell},
              {"p_min", s.p_min},
              {"p_max", s.p_max},
              {"retry_budget", s.retry_budget},
              {"k_growth", s.k_growth},
              {"target", to_json(s.target)},
              {"k2_min", s.k2_min}};
}

Schedule schedule_from_json(const Json& j) {
  Schedule s;
  s.paper_mode = get<bool>(j, "paper_mode");
  s.eps = vector_from(j, "eps", [](const Json& x) { return ratio_from_json(x); });
  s.ell = get<std::vector<std::uint32_t>>(j, "ell");
  s.p_min = get<std::uint32_t>(j, "p_min");
  s.p_max = get<std::uint32_t>(j, "p_max");
  s.retry_budget = get<std::uint32_t>(j, "retry_budget");
  s.k_growth = get<std::uint32_t>(j, "k_growth");
  s.target = ratio_from_json(field(j, "target"));
  s.k2_min = get<std::uint32_t>(j, "k2_min");
  return s;
}

Json to_json(const LevelSet& l) {
  return Json{{"n", l.n}, {"p", l.p}, {"elements", tuple_block(l.elements)}, {"base_gens", element_block(l.base_gens)}};
}

LevelSet level_set_from_json(const Json& j) {
  LevelSet l;
  l.n = get<std::uint32_t>(j, "n");
  l.p = get<std::uint32_t>(j, "p");
  l.elements = parse_tuple_block(field(j, "elements"));
  l.base_gens = parse_element_block(field(j, "base_gens"));
  for (const auto& t : l.elements) {
    if (t.size() != l.n) format_error("level " + std::to_string(l.n) + " element of width " + std::to_string(t.size()));
  }
  return l;
}

Json to_json(const LevelCertificate& c) {
  return Json{{"r", c.r},
              {"gap", to_json(c.gap)},
              {"base_relations", to_json(c.base_relations)},
              {"relation_length", c.relation_length},
              {"relations", to_json(c.relations)},
              {"generation", array_of(c.generation, [](const GenerationRecord& g) { return to_json(g); })},
              {"bounds",
               Json{{"derived_bound", num(c.bounds.derived_bound)},
                    {"sharp_bound", num(c.bounds.sharp_bound)},
                    {"level_bound", num(c.bounds.level_bound)},
                    {"target_met", c.bounds.target_met}}},
              {"mode", c.mode},
              {"direct", c.direct ? to_json(*c.direct) : Json(nullptr)},
              {"history", array_of(c.history, [](const AttemptRecord& a) { return to_json(a); })}};
}

LevelCertificate level_certificate_from_json(const Json& j) {
  LevelCertificate c;
  c.r = get<std::uint32_t>(j, "r");
  c.gap = gap_certificate_from_json(field(j, "gap"));
  c.base_relations = relation_report_from_json(field(j, "base_relations"));
  c.relation_length = get<std::uint32_t>(j, "relation_length");
  c.relations = relation_report_from_json(field(j, "relations"));
  c.generation = vector_from(j, "generation", [](const Json& x) { return generation_from_json(x); });
  const Json& b = field(j, "bounds");
  c.bounds.derived_bound = get_double(b, "derived_bound");
  c.bounds.sharp_bound = get_double(b, "sharp_bound");
  c.bounds.level_bound = get_double(b, "level_bound");
  c.bounds.target_met = get<bool>(b, "target_met");
  c.mode = get<std::string>(j, "mode");
  if (!field(j, "direct").is_null()) c.direct = norm_estimate_from_json(field(j, "direct"));
  c.history = vector_from(j, "history", [](const Json& x) { return attempt_from_json(x); });
  return c;
}

Json to_json(const TowerState& t) {
  return Json{{"seed", t.seed},
              {"schedule", to_json(t.schedule)},
              {"specs", array_of(t.specs, [](const LevelSpec& s) { return to_json(s); })},
              {"levels", array_of(t.levels, [](const LevelSet& l) { return to_json(l); })},
              {"certificates", array_of(t.certificates, [](const LevelCertificate& c) { return to_json(c); })}};
}

TowerState tower_state_from_json(const Json& j) {
  TowerState t;
  t.seed = get<std::uint64_t>(j, "seed");
  t.schedule = schedule_from_json(field(j, "schedule"));
  t.specs = vector_from(j, "specs", [](const Json& x) { return level_spec_from_json(x); });
  t.levels = vector_from(j, "levels", [](const Json& x) { return level_set_from_json(x); });
  t.certificates = vector_from(j, "certificates", [](const Json& x) { return level_certificate_from_json(x); });
  if (t.specs.size() != t.levels.size() || t.certificates.size() != t.levels.size()) {
    format_error("tower state has mismatched level, spec and certificate counts");
  }
  return t;
}

Json to_json(const BaseSetResult& b) {
  return Json{{"p", b.p},
              {"gens", element_block(b.gens)},
              {"gap", to_json(b.gap)},
              {"relations", to_json(b.relations)},
              {"generation", array_of(b.generation, [](const GenerationRecord& g) { return to_json(g); })},
              {"history", array_of(b.history, [](const AttemptRecord& a) { return to_json(a); })}};
}

BaseSetResult base_set_from_json(const Json& j) {
  BaseSetResult b;
  b.p = get<std::uint32_t>(j, "p");
  b.gens = parse_element_block(field(j, "gens"));
  b.gap = gap_certificate_from_json(field(j, "gap"));
  b.relations = relation_report_from_json(field(j, "relations"));
  b.generation = vector_from(j, "generation", [](const Json& x) { return generation_from_json(x); });
  b.history = vector_from(j, "history", [](const Json& x) { return attempt_from_json(x); });
  return b;
}

Json to_json(const TrialResult& r) {
  std::string outcomes;
  for (auto o : r.outcomes) outcomes.push_back(o ? '1' : '0');
  return Json{{"p", r.config.p},
              {"k", r.config.k},
              {"eps", num(r.config.eps)},
              {"ell", r.config.ell},
              {"trials", r.config.trials},
              {"seed", r.config.seed},
              {"successes", r.successes},
              {"fraction", num(r.fraction())},
              {"outcomes", outcomes},
              {"theoretical_bound", num(r.theoretical_bound)},
              {"formula", to_string(r.formula)},
              {"vacuous", r.vacuous},
              {"applicable", r.applicable},
              {"inconclusive", r.inconclusive}};
}

Json to_json(const ExactCount& c) {
  Json j{{"word", to_json(c.word)},
         {"word_text", c.word.to_string()},
         {"p", c.p},
         {"k", c.k},
         {"count_u", c.count_u.str()},
         {"total", c.total.str()},
         {"est_bound", c.est_bound.str()},
         {"u_bound", c.u_bound.str()},
         {"is_law", c.is_law},
         {"u_bound_ok", c.u_bound_ok},
         {"est_ok", c.est_ok},
         {"covering_ok", c.covering_ok},
         {"w_bound_ok", c.w_bound_ok}};
  j["lifted"] = c.lifted ? Json{{"w", c.lifted->w.str()}, {"v", c.lifted->v.str()}} : Json(nullptr);
  return j;
}

Json to_json(const C0Profile& p) {
  return Json{{"paper_mode", p.paper_mode}, {"rows", array_of(p.rows, [](const C0Row& r) {
                                               return Json{{"n", r.n},
                                                           {"p", r.p},
                                                           {"eps", to_json(r.eps)},
                                                           {"base_bound", num(r.base_bound)},
                                                           {"level_bound", num(r.level_bound)},
                                                           {"target", to_json(r.target)},
                                                           {"verdict", r.verdict}};
                                             })}};
}

Json to_json(const VerifyReport& r) {
  return Json{{"ok", r.ok()}, {"checks", array_of(r.checks, [](const VerifyCheck& c) {
                                 return Json{{"level", c.level}, {"name", c.name}, {"ok", c.ok}, {"detail", c.detail}};
                               })}};
}

std::string serialize(const CertificateFile& file) {
  const Json doc{{"format_version", kFormatVersion},
                 {"tool_version", kToolVersion},
                 {"kind", file.kind},
                 {"config", file.config},
                 {"body", file.body},
                 {"checksum", "crc32:" + hex32(crc32(file.body.dump()))}};
  return doc.dump(2) + "\n";
}

CertificateFile parse_certificate(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    format_error(std::string("not valid JSON: ") + e.what());
  }
  const int version = get<int>(doc, "format_version");
  if (version != kFormatVersion) format_error("unsupported format version " + std::to_string(version));
  CertificateFile file;
  file.kind = get<std::string>(doc, "kind");
  file.config = field(doc, "config");
  file.body = field(doc, "body");
  if (get<std::string>(doc, "checksum") != "crc32:" + hex32(crc32(file.body.dump()))) {
    format_error("body checksum mismatch");
  }
  return file;
}

void write_atomic(const std::string& path, std::string_view content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error(ErrorKind::Io, "write to " + tmp.string() + " failed");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorKind::Io, "cannot rename onto " + path);
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorKind::Io, "read from " + path + " failed");
  return ss.str();
}

}  // namespace pglfree::io
