#pragma once

// Certificate and state files: a JSON tree
//
//   {"format_version": 1, "tool_version": ..., "kind": ..., "config": {...},
//    "body": {...}, "checksum": "crc32:<hex of CRC-32 over body.dump()>"}
//
// Element lists inside the body are binary blocks: the concatenated 20-byte canonical
// encodings in hex, with their own CRC-32. Keys are sorted and no timestamps are written, so
// identical runs produce identical bytes.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "pglfree/measure.hpp"
#include "pglfree/montecarlo.hpp"
#include "pglfree/spectral.hpp"
#include "pglfree/tower.hpp"
#include "pglfree/words.hpp"

namespace pglfree::io {

using Json = nlohmann::json;

inline constexpr int kFormatVersion = 1;
inline constexpr const char* kToolVersion = "0.1.0";

std::uint32_t crc32(std::span<const std::uint8_t> bytes) noexcept;
std::uint32_t crc32(std::string_view text) noexcept;
std::string to_hex(std::span<const std::uint8_t> bytes);
/// Throws Format.
std::vector<std::uint8_t> from_hex(std::string_view hex);

/// Doubles as JSON numbers; non-finite values as "inf", "-inf" or "nan".
Json real(double x);
double real_from(const Json& j);

Json element_block(std::span<const PglElement> elems);
std::vector<PglElement> parse_element_block(const Json& j);
/// All tuples must have the same width.
Json tuple_block(std::span<const TupleElement> elems);
std::vector<TupleElement> parse_tuple_block(const Json& j);

Json to_json(const ReducedWord& w);
ReducedWord word_from_json(const Json& j);
Json to_json(const RelationReport& r);
RelationReport relation_report_from_json(const Json& j);
Json to_json(const NormEstimate& e);
NormEstimate norm_estimate_from_json(const Json& j);
Json to_json(const TraceBound& t);
TraceBound trace_bound_from_json(const Json& j);
Json to_json(const GapCertificate& c);
GapCertificate gap_certificate_from_json(const Json& j);
Json to_json(const AttemptRecord& a);
AttemptRecord attempt_from_json(const Json& j);
Json to_json(const GenerationRecord& g);
GenerationRecord generation_from_json(const Json& j);
Json to_json(const Ratio& r);
Ratio ratio_from_json(const Json& j);
Json to_json(const LevelSpec& s);
LevelSpec level_spec_from_json(const Json& j);
Json to_json(const Schedule& s);
Schedule schedule_from_json(const Json& j);
Json to_json(const LevelSet& l);
LevelSet level_set_from_json(const Json& j);
Json to_json(const LevelCertificate& c);
LevelCertificate level_certificate_from_json(const Json& j);
Json to_json(const TowerState& t);
TowerState tower_state_from_json(const Json& j);
Json to_json(const BaseSetResult& b);
BaseSetResult base_set_from_json(const Json& j);
Json to_json(const TrialResult& r);
Json to_json(const ExactCount& c);
Json to_json(const C0Profile& p);
Json to_json(const VerifyReport& r);

struct CertificateFile {
  std::string kind;
  Json config = Json::object();
  Json body = Json::object();
};

/// Pretty-printed with a trailing newline.
std::string serialize(const CertificateFile& file);
/// Throws Format on malformed JSON, an unknown format version, or a checksum mismatch.
CertificateFile parse_certificate(std::string_view text);

/// Writes to a temporary sibling and renames it over `path`. Throws Io.
void write_atomic(const std::string& path, std::string_view content);
/// Throws Io.
std::string read_file(const std::string& path);

}  // namespace pglfree::io
