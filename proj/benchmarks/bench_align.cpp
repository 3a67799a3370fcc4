#include <benchmark/benchmark.h>

#include <random>

#include "pairframes/align.hpp"

namespace {

pf::CellPointSet random_cells(std::mt19937_64& rng, int n, const char* annotator) {
  std::uniform_real_distribution<double> coord(0.0, 256.0);
  std::uniform_int_distribution<pf::ClassId> cls(1, 3);
  pf::CellPointSet s{"F", annotator, {}};
  for (int i = 0; i < n; ++i) s.points.push_back({coord(rng), coord(rng), cls(rng)});
  return s;
}

void BM_GreedyMatch(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const int n = static_cast<int>(state.range(0));
  const auto a = random_cells(rng, n, "A");
  const auto b = random_cells(rng, n, "B");
  for (auto _ : state) benchmark::DoNotOptimize(pf::greedy_match(a, b, 15.0));
  state.SetComplexityN(n);
}
BENCHMARK(BM_GreedyMatch)->RangeMultiplier(4)->Range(16, 1024)->Complexity();

}  // namespace

BENCHMARK_MAIN();
