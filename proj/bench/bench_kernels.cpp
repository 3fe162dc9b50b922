// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include "pglfree/kernels.hpp"
#include "pglfree/spectral.hpp"

using namespace pglfree;

namespace {

struct Fixture {
  std::shared_ptr<const GroupTable> table;
  AveragingOperator op;
  std::vector<double> v, out;
  std::vector<std::uint64_t> counts, next, weights;

  explicit Fixture(std::uint32_t p, std::uint32_t k) : table(table_for(p)), op(*table, gens(*table, k)) {
    Stream rng(1, "bench", p, k);
    v.resize(op.dimension());
    out.resize(op.dimension());
    for (auto& x : v) x = rng.uniform01() - 0.5;
    counts.resize(op.dimension());
    next.resize(op.dimension());
    for (auto& c : counts) c = rng.below(1000);
    weights.assign(op.push().count, 1);
  }

  static std::vector<PglElement> gens(const GroupTable& t, std::uint32_t k) {
    Stream rng(2, "bench-gens", t.prime(), k);
    std::vector<PglElement> g;
    for (std::uint32_t i = 0; i < k; ++i) g.push_back(sample_uniform(t, rng));
    return g;
  }
};

Fixture& fixture(std::uint32_t p) {
  static Fixture f13(13, 16), f31(31, 16);
  return p == 13 ? f13 : f31;
}

template <bool Parallel>
void BM_AverageGather(benchmark::State& state) {
  Fixture& f = fixture(static_cast<std::uint32_t>(state.range(0)));
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::parallel::average_gather(f.op.pull(), f.v, f.out);
    } else {
      kernels::serial::average_gather(f.op.pull(), f.v, f.out);
    }
    benchmark::DoNotOptimize(f.out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.v.size()));
}

template <bool Parallel>
void BM_Dot(benchmark::State& state) {
  Fixture& f = fixture(static_cast<std::uint32_t>(state.range(0)));
  for (auto _ : state) {
    double d = Parallel ? kernels::parallel::dot(f.v, f.v) : kernels::serial::dot(f.v, f.v);
    benchmark::DoNotOptimize(d);
  }
}

template <bool Parallel>
void BM_ConvolveCounts(benchmark::State& state) {
  Fixture& f = fixture(static_cast<std::uint32_t>(state.range(0)));
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::parallel::convolve_counts<std::uint64_t>(f.counts, f.op.push(), f.weights, f.next);
    } else {
      kernels::serial::convolve_counts<std::uint64_t>(f.counts, f.op.push(), f.weights, f.next);
    }
    benchmark::DoNotOptimize(f.next.data());
  }
}

template <bool Parallel>
void BM_WordSolutions(benchmark::State& state) {
  const auto t = table_for(static_cast<std::uint32_t>(state.range(0)));
  const auto w = ReducedWord::parse("abAB");
  for (auto _ : state) {
    auto n = Parallel ? kernels::parallel::count_word_solutions(*t, w, 2)
                      : kernels::serial::count_word_solutions(*t, w, 2);
    benchmark::DoNotOptimize(n);
  }
}

}  // namespace

BENCHMARK(BM_AverageGather<false>)->Arg(13)->Arg(31);
BENCHMARK(BM_AverageGather<true>)->Arg(13)->Arg(31);
BENCHMARK(BM_Dot<false>)->Arg(13)->Arg(31);
BENCHMARK(BM_Dot<true>)->Arg(13)->Arg(31);
BENCHMARK(BM_ConvolveCounts<false>)->Arg(13)->Arg(31);
BENCHMARK(BM_ConvolveCounts<true>)->Arg(13)->Arg(31);
BENCHMARK(BM_WordSolutions<false>)->Arg(5)->Arg(7);
BENCHMARK(BM_WordSolutions<true>)->Arg(5)->Arg(7);

BENCHMARK_MAIN();
