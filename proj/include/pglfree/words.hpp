#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pglfree/error.hpp"
#include "pglfree/group_ops.hpp"

namespace pglfree {

/// g_gen^{exp} with exp in {+1, -1}. Letters are ordered by code = 2*gen + (exp < 0).
struct Letter {
  std::uint32_t gen = 0;
  std::int8_t exp = 1;

  std::uint32_t code() const noexcept { return 2 * gen + (exp < 0 ? 1u : 0u); }
  static Letter from_code(std::uint32_t code) noexcept {
    return Letter{code / 2, static_cast<std::int8_t>(code % 2 ? -1 : 1)};
  }
  Letter inverse() const noexcept { return Letter{gen, static_cast<std::int8_t>(-exp)}; }

  friend bool operator==(const Letter&, const Letter&) = default;
};

/// True iff no letter is immediately followed by its inverse. Throws EmptyWord.
bool is_reduced(std::span<const Letter> letters);

/// Free reduction (may return an empty sequence).
std::vector<Letter> free_reduce(std::span<const Letter> letters);

/// Nonempty, freely reduced word.
class ReducedWord {
 public:
  /// Throws EmptyWord, NotReduced, or InvalidArgument for an exponent outside {+1, -1}.
  static ReducedWord from_letters(std::vector<Letter> letters);
  /// Parses letters 'a'..'z' (exponent +1) and 'A'..'Z' (exponent -1); whitespace ignored.
  static ReducedWord parse(std::string_view text);

  std::span<const Letter> letters() const noexcept { return letters_; }
  std::size_t size() const noexcept { return letters_.size(); }
  /// Number of distinct generator slots needed (max gen + 1).
  std::uint32_t symbol_count() const noexcept;
  ReducedWord inverse() const;
  std::string to_string() const;

  friend bool operator==(const ReducedWord&, const ReducedWord&) = default;

 private:
  explicit ReducedWord(std::vector<Letter> letters) : letters_(std::move(letters)) {}
  std::vector<Letter> letters_;
};

/// 2k(2k-1)^(length-1), saturating at UINT64_MAX.
std::uint64_t reduced_word_count(std::uint32_t k, std::uint32_t length) noexcept;
/// Sum of reduced_word_count over lengths 1..max_length, saturating.
std::uint64_t reduced_words_up_to(std::uint32_t k, std::uint32_t max_length) noexcept;

enum class RelationMethod { dfs, meet_in_middle };
const char* to_string(RelationMethod m) noexcept;
RelationMethod relation_method_from_string(std::string_view s);

inline constexpr std::uint64_t kDefaultWordBudget = 1'000'000'000;

struct RelationOptions {
  RelationMethod method = RelationMethod::dfs;
  std::uint64_t word_budget = kDefaultWordBudget;
  bool parallel = true;
};

struct RelationReport {
  std::uint32_t max_length = 0;
  std::uint64_t words_checked = 0;
  std::optional<ReducedWord> witness;
  RelationMethod method = RelationMethod::dfs;
  /// Set when the word budget ran out before a verdict; never treat as certified.
  bool inconclusive = false;

  bool clean() const noexcept { return !witness && !inconclusive; }
};

struct InjectivityReport {
  bool injective = false;
  std::uint64_t words_checked = 0;
  /// Two distinct reduced words (first may be absent: the empty word, i.e. identity).
  std::optional<ReducedWord> first;
  std::optional<ReducedWord> second;
  bool inconclusive = false;
};

template <GroupOps Ops>
typename Ops::Element evaluate(const ReducedWord& w, std::span<const typename Ops::Element> gens,
                               const Ops& ops) {
  auto acc = ops.identity();
  for (const Letter& l : w.letters()) {
    if (l.gen >= gens.size()) {
      throw Error(ErrorKind::IndexOutOfRange, "generator index " + std::to_string(l.gen));
    }
    acc = ops.mul(acc, l.exp > 0 ? gens[l.gen] : ops.inv(gens[l.gen]));
  }
  return acc;
}

PglElement evaluate(const ReducedWord& w, std::span<const PglElement> gens, const GroupTable& table);

namespace detail {

template <class Element>
struct BranchResult {
  bool found = false;
  bool budget_hit = false;
  std::uint64_t visited = 0;
  std::vector<std::uint32_t> codes;
};

/// Pre-order DFS over reduced words starting with letter code `first`, lengths 1..max_length.
/// Words shorter than `min_check_depth` are traversed but neither tested nor counted.
template <GroupOps Ops, class StopFn>
BranchResult<typename Ops::Element> dfs_branch(const std::vector<typename Ops::Element>& letter_elems,
                                               std::uint32_t first, std::uint32_t max_length,
                                               std::uint32_t min_check_depth, const Ops& ops,
                                               std::uint64_t budget, StopFn&& should_stop) {
  using Element = typename Ops::Element;
  const auto ncodes = static_cast<std::uint32_t>(letter_elems.size());
  BranchResult<Element> res;
  std::vector<Element> prod(max_length + 1);
  std::vector<std::uint32_t> code(max_length);
  prod[0] = ops.identity();
  code[0] = first;
  prod[1] = letter_elems[first];
  std::uint32_t depth = 1;
  std::uint64_t since_poll = 0;
  for (;;) {
    if (depth >= min_check_depth) {
      if (res.visited >= budget) {
        res.budget_hit = true;
        return res;
      }
      ++res.visited;
      if (ops.is_identity(prod[depth])) {
        res.found = true;
        res.codes.assign(code.begin(), code.begin() + depth);
        return res;
      }
    }
    if (++since_poll >= 4096) {
      since_poll = 0;
      if (should_stop()) return res;
    }
    if (depth < max_length) {
      std::uint32_t c = 0;
      if (c == (code[depth - 1] ^ 1u)) ++c;
      code[depth] = c;
      prod[depth + 1] = ops.mul(prod[depth], letter_elems[c]);
      ++depth;
      continue;
    }
    for (;;) {
      if (depth == 1) return res;
      std::uint32_t c = code[depth - 1] + 1;
      if (c == (code[depth - 2] ^ 1u)) ++c;
      if (c < ncodes) {
        code[depth - 1] = c;
        prod[depth] = ops.mul(prod[depth - 1], letter_elems[c]);
        break;
      }
      --depth;
    }
  }
}

template <GroupOps Ops>
std::vector<typename Ops::Element> letter_elements(std::span<const typename Ops::Element> gens, const Ops& ops) {
  std::vector<typename Ops::Element> out;
  out.reserve(2 * gens.size());
  for (const auto& g : gens) {
    out.push_back(g);
    out.push_back(ops.inv(g));
  }
  return out;
}

inline ReducedWord word_from_codes(std::span<const std::uint32_t> codes) {
  std::vector<Letter> letters;
  letters.reserve(codes.size());
  for (auto c : codes) letters.push_back(Letter::from_code(c));
  return ReducedWord::from_letters(std::move(letters));
}

/// Direct scans for relations of length 1 and 2. Returns true if a witness was found.
template <GroupOps Ops>
bool scan_short_relations(const std::vector<typename Ops::Element>& letter_elems, std::uint32_t max_length,
                          const Ops& ops, RelationReport& report) {
  const auto ncodes = static_cast<std::uint32_t>(letter_elems.size());
  for (std::uint32_t c = 0; c < ncodes; ++c) {
    ++report.words_checked;
    if (ops.is_identity(letter_elems[c])) {
      const std::uint32_t codes[] = {c};
      report.witness = word_from_codes(codes);
      return true;
    }
  }
  if (max_length < 2) return false;
  for (std::uint32_t c1 = 0; c1 < ncodes; ++c1) {
    for (std::uint32_t c2 = 0; c2 < ncodes; ++c2) {
      if (c2 == (c1 ^ 1u)) continue;
      ++report.words_checked;
      if (ops.is_identity(ops.mul(letter_elems[c1], letter_elems[c2]))) {
        const std::uint32_t codes[] = {c1, c2};
        report.witness = word_from_codes(codes);
        return true;
      }
    }
  }
  return false;
}

template <GroupOps Ops>
void dfs_serial(const std::vector<typename Ops::Element>& letter_elems, std::uint32_t max_length, const Ops& ops,
                std::uint64_t budget, RelationReport& report) {
  const auto ncodes = static_cast<std::uint32_t>(letter_elems.size());
  for (std::uint32_t b = 0; b < ncodes; ++b) {
    const std::uint64_t remaining = budget > report.words_checked ? budget - report.words_checked : 0;
    if (remaining == 0) {
      report.inconclusive = true;
      return;
    }
    auto res = dfs_branch(letter_elems, b, max_length, 3, ops, remaining, [] { return false; });
    report.words_checked += res.visited;
    if (res.found) {
      report.witness = word_from_codes(res.codes);
      return;
    }
    if (res.budget_hit) {
      report.inconclusive = true;
      return;
    }
  }
}

/// Branches over the first letter run concurrently; the witness reported is the one from
/// the smallest first letter, i.e. exactly what dfs_serial finds.
template <GroupOps Ops>
void dfs_parallel(const std::vector<typename Ops::Element>& letter_elems, std::uint32_t max_length,
                  const Ops& ops, RelationReport& report) {
  const auto ncodes = static_cast<int>(letter_elems.size());
  std::vector<BranchResult<typename Ops::Element>> results(static_cast<std::size_t>(ncodes));
  std::atomic<int> best{ncodes};
  constexpr auto unlimited = std::numeric_limits<std::uint64_t>::max();
#pragma omp parallel for schedule(dynamic, 1)
  for (int b = 0; b < ncodes; ++b) {
    if (best.load(std::memory_order_relaxed) < b) continue;
    auto res = dfs_branch(letter_elems, static_cast<std::uint32_t>(b), max_length, 3, ops, unlimited,
                          [&] { return best.load(std::memory_order_relaxed) < b; });
    if (res.found) {
      int cur = best.load();
      while (b < cur && !best.compare_exchange_weak(cur, b)) {
      }
    }
    results[static_cast<std::size_t>(b)] = std::move(res);
  }
  const int winner = best.load();
  for (int b = 0; b < ncodes && b <= winner; ++b) {
    auto& res = results[static_cast<std::size_t>(b)];
    report.words_checked += res.visited;
    if (b == winner) report.witness = word_from_codes(res.codes);
  }
}

template <class Element>
struct PrefixTree {
  struct Node {
    std::uint32_t parent;
    std::uint32_t code;
    std::uint32_t length;
  };
  std::vector<Node> nodes;
  std::vector<Element> values;

  std::vector<Letter> letters(std::uint32_t id) const {
    std::vector<Letter> out(nodes[id].length);
    for (std::uint32_t cur = id; nodes[cur].length > 0; cur = nodes[cur].parent) {
      out[nodes[cur].length - 1] = Letter::from_code(nodes[cur].code);
    }
    return out;
  }
};

template <GroupOps Ops>
struct OpsHash {
  const Ops* ops;
  std::size_t operator()(const typename Ops::Element& x) const { return ops->hash(x); }
};

/// Breadth-first enumeration of reduced words up to `max_length`. `on_node(tree, id, map_hit)`
/// is called for every new word; returning true stops the enumeration.
template <GroupOps Ops, class OnNode>
bool enumerate_prefix_tree(const std::vector<typename Ops::Element>& letter_elems, std::uint32_t max_length,
                           const Ops& ops, std::uint64_t budget, std::uint64_t& visited, bool& budget_hit,
                           OnNode&& on_node) {
  using Element = typename Ops::Element;
  const auto ncodes = static_cast<std::uint32_t>(letter_elems.size());
  PrefixTree<Element> tree;
  std::unordered_map<Element, std::uint32_t, OpsHash<Ops>> first_seen(64, OpsHash<Ops>{&ops});
  tree.nodes.push_back({0, 0, 0});
  tree.values.push_back(ops.identity());
  first_seen.emplace(tree.values[0], 0);
  std::vector<std::uint32_t> frontier{0}, next;
  for (std::uint32_t len = 1; len <= max_length; ++len) {
    next.clear();
    for (std::uint32_t parent : frontier) {
      for (std::uint32_t c = 0; c < ncodes; ++c) {
        if (len > 1 && c == (tree.nodes[parent].code ^ 1u)) continue;
        if (visited >= budget) {
          budget_hit = true;
          return false;
        }
        ++visited;
        const auto id = static_cast<std::uint32_t>(tree.nodes.size());
        tree.nodes.push_back({parent, c, len});
        tree.values.push_back(ops.mul(tree.values[parent], letter_elems[c]));
        auto it = first_seen.find(tree.values[id]);
        std::optional<std::uint32_t> hit;
        if (it != first_seen.end()) {
          hit = it->second;
        } else {
          first_seen.emplace(tree.values[id], id);
        }
        if (on_node(tree, id, hit)) return true;
        next.push_back(id);
      }
    }
    std::swap(frontier, next);
  }
  return false;
}

template <GroupOps Ops>
void meet_in_middle(const std::vector<typename Ops::Element>& letter_elems, std::uint32_t max_length,
                    const Ops& ops, std::uint64_t budget, RelationReport& report) {
  const std::uint32_t half = (max_length + 1) / 2;
  bool budget_hit = false;
  std::uint64_t visited = 0;
  enumerate_prefix_tree(letter_elems, half, ops, budget, visited, budget_hit,
                        [&](const auto& tree, std::uint32_t id, std::optional<std::uint32_t> hit) {
                          if (!hit) return false;
                          // z and y evaluate equally, so reduce(z y^-1) is a relation.
                          auto joined = tree.letters(*hit);
                          auto tail = tree.letters(id);
                          for (auto it = tail.rbegin(); it != tail.rend(); ++it) joined.push_back(it->inverse());
                          auto reduced = free_reduce(joined);
                          if (reduced.empty() || reduced.size() > max_length) return false;
                          report.witness = ReducedWord::from_letters(std::move(reduced));
                          return true;
                        });
  report.words_checked += visited;
  if (!report.witness && budget_hit) report.inconclusive = true;
}

}  // namespace detail

/// Decides whether every nontrivial reduced word of length <= max_length in gens^{+-1}
/// is a non-identity element. Repeated generators count as distinct letters.
template <GroupOps Ops>
RelationReport check_no_relations(std::span<const typename Ops::Element> gens, std::uint32_t max_length,
                                  const Ops& ops, const RelationOptions& opts = {}) {
  if (max_length < 1) throw Error(ErrorKind::InvalidArgument, "relation length must be >= 1");
  RelationReport report;
  report.max_length = max_length;
  report.method = opts.method;
  if (gens.empty()) return report;
  const auto letter_elems = detail::letter_elements(gens, ops);
  const auto k = static_cast<std::uint32_t>(gens.size());
  if (detail::scan_short_relations(letter_elems, max_length, ops, report)) return report;
  if (max_length <= 2) return report;
  if (opts.method == RelationMethod::meet_in_middle) {
    detail::meet_in_middle(letter_elems, max_length, ops, opts.word_budget, report);
    return report;
  }
  const std::uint64_t total = reduced_words_up_to(k, max_length);
  if (opts.parallel && total <= opts.word_budget) {
    detail::dfs_parallel(letter_elems, max_length, ops, report);
  } else {
    detail::dfs_serial(letter_elems, max_length, ops, opts.word_budget, report);
  }
  return report;
}

RelationReport check_no_relations(std::span<const PglElement> gens, std::uint32_t max_length,
                                  const GroupTable& table, const RelationOptions& opts = {});

/// True iff all reduced words of length 1..max_length evaluate to pairwise distinct
/// non-identity elements; equivalent to having no relation of length <= 2*max_length.
template <GroupOps Ops>
InjectivityReport check_word_image_injectivity(std::span<const typename Ops::Element> gens,
                                               std::uint32_t max_length, const Ops& ops,
                                               std::uint64_t word_budget = kDefaultWordBudget) {
  if (max_length < 1) throw Error(ErrorKind::InvalidArgument, "word length must be >= 1");
  InjectivityReport report;
  const auto letter_elems = detail::letter_elements(gens, ops);
  bool budget_hit = false;
  const bool collided = detail::enumerate_prefix_tree(
      letter_elems, max_length, ops, word_budget, report.words_checked, budget_hit,
      [&](const auto& tree, std::uint32_t id, std::optional<std::uint32_t> hit) {
        if (!hit) return false;
        if (*hit != 0) report.first = ReducedWord::from_letters(tree.letters(*hit));
        report.second = ReducedWord::from_letters(tree.letters(id));
        return true;
      });
  report.inconclusive = !collided && budget_hit;
  report.injective = !collided && !budget_hit;
  return report;
}

InjectivityReport check_word_image_injectivity(std::span<const PglElement> gens, std::uint32_t max_length,
                                               const GroupTable& table,
                                               std::uint64_t word_budget = kDefaultWordBudget);

}  // namespace pglfree
