#include "pglfree/kernels.hpp"

#include <omp.h>

#include "pglfree/error.hpp"

namespace pglfree::kernels {

namespace {

double block_sum(std::span<const double> x, std::span<const double> y, std::size_t begin, std::size_t end) {
  double s = 0.0;
  for (std::size_t i = begin; i < end; ++i) s += x[i] * y[i];
  return s;
}

void check_sizes(const PermutationSet& perms, std::span<const double> in, std::span<double> out) {
  if (in.size() != perms.size || out.size() != perms.size) {
    throw Error(ErrorKind::InvalidArgument, "vector length does not match the permutation degree");
  }
}

struct WordEvaluator {
  const GroupTable& table;
  const ReducedWord& word;
  std::uint32_t k;
  std::vector<std::uint32_t> inverse_index;

  WordEvaluator(const GroupTable& t, const ReducedWord& w, std::uint32_t symbols) : table(t), word(w), k(symbols) {
    if (w.symbol_count() > symbols) throw Error(ErrorKind::IndexOutOfRange, "word uses more symbols than k");
    inverse_index.resize(t.order());
    for (std::uint32_t i = 0; i < t.order(); ++i) inverse_index[i] = t.inv_index(i);
  }

  bool vanishes(std::uint64_t tuple) const {
    std::uint32_t digits[64];
    const std::uint64_t n = table.order();
    for (std::uint32_t i = 0; i < k; ++i) {
      digits[i] = static_cast<std::uint32_t>(tuple % n);
      tuple /= n;
    }
    PglElement acc = table.element(table.identity_index());
    for (const Letter& l : word.letters()) {
      const std::uint32_t idx = l.exp > 0 ? digits[l.gen] : inverse_index[digits[l.gen]];
      acc = mul(acc, table.element(idx));
    }
    return acc.is_identity();
  }
};

std::uint64_t checked_power(std::uint64_t base, std::uint32_t exp, std::uint64_t limit) {
  unsigned __int128 r = 1;
  for (std::uint32_t i = 0; i < exp; ++i) {
    r *= base;
    if (r > limit) throw Error(ErrorKind::BudgetExceeded, "exhaustive tuple space too large");
  }
  return static_cast<std::uint64_t>(r);
}

struct LiftedEvaluator {
  std::uint32_t p;
  const ReducedWord& word;
  std::uint32_t k;

  /// Returns {scalar, all invertible}.
  std::pair<bool, bool> classify(std::uint64_t tuple) const {
    Mat2 mats[16];
    bool invertible = true;
    for (std::uint32_t i = 0; i < k; ++i) {
      std::uint32_t e[4];
      for (auto& v : e) {
        v = static_cast<std::uint32_t>(tuple % p);
        tuple /= p;
      }
      mats[i] = Mat2{p, e[0], e[1], e[2], e[3]};
      if (mats[i].det() == 0) invertible = false;
    }
    Mat2 acc{p, 1, 0, 0, 1};
    for (const Letter& l : word.letters()) {
      acc = acc * (l.exp > 0 ? mats[l.gen] : mats[l.gen].adjugate());
    }
    return {acc.is_scalar(), invertible};
  }
};

constexpr std::uint64_t kMaxTupleSpace = 1ULL << 40;

}  // namespace

namespace serial {

void average_gather(const PermutationSet& perms, std::span<const double> in, std::span<double> out) {
  check_sizes(perms, in, out);
  const double w = 1.0 / perms.count;
  for (std::uint64_t x = 0; x < perms.size; ++x) {
    double acc = 0.0;
    for (std::uint32_t f = 0; f < perms.count; ++f) acc += in[perms.data[static_cast<std::size_t>(f) * perms.size + x]];
    out[x] = acc * w;
  }
}

void subtract_block_means(std::span<double> v, std::uint64_t block) {
  for (std::size_t start = 0; start < v.size(); start += block) {
    double s = 0.0;
    for (std::size_t i = start; i < start + block; ++i) s += v[i];
    const double mean = s / static_cast<double>(block);
    for (std::size_t i = start; i < start + block; ++i) v[i] -= mean;
  }
}

double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t b = 0; b < x.size(); b += kReductionBlock) {
    s += block_sum(x, y, b, std::min(x.size(), b + kReductionBlock));
  }
  return s;
}

std::uint64_t count_word_solutions(const GroupTable& table, const ReducedWord& w, std::uint32_t k) {
  const WordEvaluator eval(table, w, k);
  const std::uint64_t total = checked_power(table.order(), k, kMaxTupleSpace);
  std::uint64_t count = 0;
  for (std::uint64_t t = 0; t < total; ++t) count += eval.vanishes(t) ? 1 : 0;
  return count;
}

LiftedCounts count_lifted(std::uint32_t p, const ReducedWord& w, std::uint32_t k) {
  if (k > 16 || w.symbol_count() > k) throw Error(ErrorKind::InvalidArgument, "bad symbol count");
  const LiftedEvaluator eval{p, w, k};
  const std::uint64_t total = checked_power(p, 4 * k, kMaxTupleSpace);
  LiftedCounts out;
  for (std::uint64_t t = 0; t < total; ++t) {
    const auto [scalar, invertible] = eval.classify(t);
    if (scalar) {
      ++out.scalar_all;
      if (invertible) ++out.scalar_invertible;
    }
  }
  return out;
}

}  // namespace serial

namespace parallel {

void average_gather(const PermutationSet& perms, std::span<const double> in, std::span<double> out) {
  check_sizes(perms, in, out);
  const double w = 1.0 / perms.count;
  const auto n = static_cast<std::int64_t>(perms.size);
#pragma omp parallel for schedule(static)
  for (std::int64_t x = 0; x < n; ++x) {
    double acc = 0.0;
    for (std::uint32_t f = 0; f < perms.count; ++f) {
      acc += in[perms.data[static_cast<std::size_t>(f) * perms.size + static_cast<std::size_t>(x)]];
    }
    out[static_cast<std::size_t>(x)] = acc * w;
  }
}

void subtract_block_means(std::span<double> v, std::uint64_t block) {
  const auto nblocks = static_cast<std::int64_t>(v.size() / block);
#pragma omp parallel for schedule(static)
  for (std::int64_t b = 0; b < nblocks; ++b) {
    const std::size_t start = static_cast<std::size_t>(b) * block;
    double s = 0.0;
    for (std::size_t i = start; i < start + block; ++i) s += v[i];
    const double mean = s / static_cast<double>(block);
    for (std::size_t i = start; i < start + block; ++i) v[i] -= mean;
  }
}

double dot(std::span<const double> x, std::span<const double> y) {
  const std::size_t nblocks = (x.size() + kReductionBlock - 1) / kReductionBlock;
  std::vector<double> partial(nblocks);
#pragma omp parallel for schedule(static)
  for (std::int64_t b = 0; b < static_cast<std::int64_t>(nblocks); ++b) {
    const std::size_t begin = static_cast<std::size_t>(b) * kReductionBlock;
    partial[static_cast<std::size_t>(b)] = block_sum(x, y, begin, std::min(x.size(), begin + kReductionBlock));
  }
  double s = 0.0;
  for (double v : partial) s += v;
  return s;
}

std::uint64_t count_word_solutions(const GroupTable& table, const ReducedWord& w, std::uint32_t k) {
  const WordEvaluator eval(table, w, k);
  const auto total = static_cast<std::int64_t>(checked_power(table.order(), k, kMaxTupleSpace));
  std::uint64_t count = 0;
#pragma omp parallel for schedule(static) reduction(+ : count)
  for (std::int64_t t = 0; t < total; ++t) count += eval.vanishes(static_cast<std::uint64_t>(t)) ? 1 : 0;
  return count;
}

LiftedCounts count_lifted(std::uint32_t p, const ReducedWord& w, std::uint32_t k) {
  if (k > 16 || w.symbol_count() > k) throw Error(ErrorKind::InvalidArgument, "bad symbol count");
  const LiftedEvaluator eval{p, w, k};
  const auto total = static_cast<std::int64_t>(checked_power(p, 4 * k, kMaxTupleSpace));
  std::uint64_t all = 0, invertible_count = 0;
#pragma omp parallel for schedule(static) reduction(+ : all, invertible_count)
  for (std::int64_t t = 0; t < total; ++t) {
    const auto [scalar, invertible] = eval.classify(static_cast<std::uint64_t>(t));
    if (scalar) {
      ++all;
      if (invertible) ++invertible_count;
    }
  }
  return LiftedCounts{all, invertible_count};
}

}  // namespace parallel

int thread_count() noexcept { return omp_get_max_threads(); }

void set_thread_count(int n) noexcept {
  if (n > 0) omp_set_num_threads(n);
}

}  // namespace pglfree::kernels
