#include <benchmark/benchmark.h>

#include "pairframes/bootstrap.hpp"
#include "pairframes/nested.hpp"
#include "pairframes/simgen.hpp"

namespace {

pf::Dataset panel() {
  pf::PanelConfig c;
  c.task = pf::Task::cell_class;
  c.slides = 40;
  c.frames_per_slide = 4;
  c.pathologists = 4;
  c.seed = 12;
  c.pathologist_error = {0.1, 0.05, 0.5, 0.7, 1.0};
  c.model_error = {0.2, 0.05, 0.5, 0.7, 1.0};
  return pf::generate_panel(c).dataset;
}

void BM_HierarchicalResample(benchmark::State& state) {
  const auto d = panel();
  const pf::FrameScope scope(d);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(pf::hierarchical_resample(scope, seed++));
}
BENCHMARK(BM_HierarchicalResample);

void BM_NestedBootstrap(benchmark::State& state) {
  const auto d = panel();
  const pf::NestedEvaluator ev(d, pf::Task::cell_class);
  const pf::FrameScope scope(d, ev.frames());
  const std::vector<pf::NestedQuery> queries{{pf::Metric::f1, 1}};
  const pf::ScalarStatistic stat = [&](std::span<const std::uint32_t> m) {
    return ev.evaluate(queries, m).front().overall.mean_difference;
  };
  pf::ResampleSpec spec;
  spec.replicates = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(pf::bootstrap_statistic(scope, stat, spec));
}
BENCHMARK(BM_NestedBootstrap)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
