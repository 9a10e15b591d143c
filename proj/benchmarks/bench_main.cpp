#include <benchmark/benchmark.h>

#include <vector>

#include "vulnsib/consensus.hpp"
#include "vulnsib/corpus.hpp"
#include "vulnsib/grouping.hpp"
#include "vulnsib/linkgen.hpp"
#include "vulnsib/siamese.hpp"

using namespace vulnsib;

namespace {

// Planted partition into groups of 10 with roughly 5% of entries flipped.
BinaryMatrix noisy_partition(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back("v" + std::to_string(i));
  BinaryMatrix m(ids);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      std::uint8_t v = i / 10 == j / 10 ? 1 : 0;
      if (rng.bernoulli(0.05)) v ^= 1;
      m(i, j) = v;
      m(j, i) = v;
    }
  return m;
}

void BM_ScoreMatrix(benchmark::State& state) {
  const auto p = noisy_partition(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(score_matrix(p));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ScoreMatrix)->RangeMultiplier(2)->Range(16, 256)->Complexity(benchmark::oNCubed);

void BM_AssignGroups(benchmark::State& state) {
  const auto c = apply_consensus(noisy_partition(static_cast<std::size_t>(state.range(0)), 2));
  for (auto _ : state) benchmark::DoNotOptimize(assign_groups(c));
}
BENCHMARK(BM_AssignGroups)->RangeMultiplier(2)->Range(16, 256);

void BM_Forward(benchmark::State& state) {
  TrainConfig cfg;
  const auto model = init_model(kDefaultEmbeddingDim, cfg);
  Rng rng(3);
  std::vector<double> a(kDefaultEmbeddingDim);
  std::vector<double> b(kDefaultEmbeddingDim);
  for (auto& x : a) x = rng.normal();
  for (auto& x : b) x = rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(forward(model, a, b));
}
BENCHMARK(BM_Forward);

void BM_WeightedSampling(benchmark::State& state) {
  const auto catalog = GroupCatalog::from_cardinalities({216, 45, 76, 658, 12, 253, 1091, 183});
  const double p = static_cast<double>(state.range(0));
  std::size_t emitted = 0;
  for (auto _ : state) {
    const auto links = sample_negative_weighted(catalog, {p, 4});
    emitted = links.size();
    benchmark::DoNotOptimize(links.data());
  }
  state.counters["links"] = static_cast<double>(emitted);
}
BENCHMARK(BM_WeightedSampling)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
