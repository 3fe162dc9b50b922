#include "pglfree/words.hpp"

#include <cctype>

namespace pglfree {

bool is_reduced(std::span<const Letter> letters) {
  if (letters.empty()) throw Error(ErrorKind::EmptyWord, "word has no letters");
  for (std::size_t i = 1; i < letters.size(); ++i) {
    if (letters[i].gen == letters[i - 1].gen && letters[i].exp != letters[i - 1].exp) return false;
  }
  return true;
}

std::vector<Letter> free_reduce(std::span<const Letter> letters) {
  std::vector<Letter> out;
  out.reserve(letters.size());
  for (const Letter& l : letters) {
    if (!out.empty() && out.back() == l.inverse()) {
      out.pop_back();
    } else {
      out.push_back(l);
    }
  }
  return out;
}

ReducedWord ReducedWord::from_letters(std::vector<Letter> letters) {
  for (const Letter& l : letters) {
    if (l.exp != 1 && l.exp != -1) throw Error(ErrorKind::InvalidArgument, "exponent must be +1 or -1");
  }
  if (!is_reduced(letters)) throw Error(ErrorKind::NotReduced, "letter followed by its inverse");
  return ReducedWord(std::move(letters));
}

ReducedWord ReducedWord::parse(std::string_view text) {
  std::vector<Letter> letters;
  for (char ch : text) {
    const auto u = static_cast<unsigned char>(ch);
    if (std::isspace(u)) continue;
    if (ch >= 'a' && ch <= 'z') {
      letters.push_back(Letter{static_cast<std::uint32_t>(ch - 'a'), 1});
    } else if (ch >= 'A' && ch <= 'Z') {
      letters.push_back(Letter{static_cast<std::uint32_t>(ch - 'A'), -1});
    } else {
      throw Error(ErrorKind::InvalidArgument, std::string("bad letter '") + ch + "' in word");
    }
  }
  return from_letters(std::move(letters));
}

std::uint32_t ReducedWord::symbol_count() const noexcept {
  std::uint32_t k = 0;
  for (const Letter& l : letters_) k = std::max(k, l.gen + 1);
  return k;
}

ReducedWord ReducedWord::inverse() const {
  std::vector<Letter> out;
  out.reserve(letters_.size());
  for (auto it = letters_.rbegin(); it != letters_.rend(); ++it) out.push_back(it->inverse());
  return ReducedWord(std::move(out));
}

std::string ReducedWord::to_string() const {
  std::string out;
  for (const Letter& l : letters_) {
    if (l.gen < 26) {
      out.push_back(static_cast<char>((l.exp > 0 ? 'a' : 'A') + l.gen));
    } else {
      out += "[" + std::to_string(l.gen) + (l.exp > 0 ? "+]" : "-]");
    }
  }
  return out;
}

std::uint64_t reduced_word_count(std::uint32_t k, std::uint32_t length) noexcept {
  if (k == 0 || length == 0) return 0;
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  unsigned __int128 n = 2 * static_cast<unsigned __int128>(k);
  for (std::uint32_t j = 1; j < length; ++j) {
    n *= (2 * static_cast<unsigned __int128>(k) - 1);
    if (n > kMax) return kMax;
  }
  return static_cast<std::uint64_t>(n);
}

std::uint64_t reduced_words_up_to(std::uint32_t k, std::uint32_t max_length) noexcept {
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t total = 0;
  for (std::uint32_t j = 1; j <= max_length; ++j) {
    const std::uint64_t c = reduced_word_count(k, j);
    if (c == kMax || total > kMax - c) return kMax;
    total += c;
  }
  return total;
}

const char* to_string(RelationMethod m) noexcept {
  return m == RelationMethod::dfs ? "dfs" : "meet_in_middle";
}

RelationMethod relation_method_from_string(std::string_view s) {
  if (s == "dfs") return RelationMethod::dfs;
  if (s == "meet_in_middle" || s == "mitm") return RelationMethod::meet_in_middle;
  throw Error(ErrorKind::InvalidArgument, "unknown relation method: " + std::string(s));
}

PglElement evaluate(const ReducedWord& w, std::span<const PglElement> gens, const GroupTable& table) {
  for (const auto& g : gens) {
    if (g.modulus() != table.prime()) throw Error(ErrorKind::ModulusMismatch, "generator not in table");
  }
  return evaluate(w, gens, PglOps{table.prime()});
}

RelationReport check_no_relations(std::span<const PglElement> gens, std::uint32_t max_length,
                                  const GroupTable& table, const RelationOptions& opts) {
  for (const auto& g : gens) {
    if (g.modulus() != table.prime()) throw Error(ErrorKind::ModulusMismatch, "generator not in table");
  }
  return check_no_relations(gens, max_length, PglOps{table.prime()}, opts);
}

InjectivityReport check_word_image_injectivity(std::span<const PglElement> gens, std::uint32_t max_length,
                                               const GroupTable& table, std::uint64_t word_budget) {
  for (const auto& g : gens) {
    if (g.modulus() != table.prime()) throw Error(ErrorKind::ModulusMismatch, "generator not in table");
  }
  return check_word_image_injectivity(gens, max_length, PglOps{table.prime()}, word_budget);
}

}  // namespace pglfree
