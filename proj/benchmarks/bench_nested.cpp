#include <benchmark/benchmark.h>

#include "pairframes/nested.hpp"
#include "pairframes/simgen.hpp"

namespace {

pf::Dataset panel(pf::Task task, int slides) {
  pf::PanelConfig c;
  c.task = task;
  c.slides = slides;
  c.frames_per_slide = 4;
  c.pathologists = 4;
  c.seed = 11;
  c.pathologist_error = {0.1, 0.05, 0.5, 0.7, 1.0};
  c.model_error = {0.2, 0.05, 0.5, 0.7, 1.0};
  return pf::generate_panel(c).dataset;
}

void BM_EvaluatorConstruction(benchmark::State& state) {
  const auto d = panel(pf::Task::cell_class, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(pf::NestedEvaluator(d, pf::Task::cell_class));
}
BENCHMARK(BM_EvaluatorConstruction)->Arg(20)->Arg(80)->Unit(benchmark::kMillisecond);

void BM_Evaluate(benchmark::State& state) {
  const auto d = panel(pf::Task::cell_class, static_cast<int>(state.range(0)));
  const pf::NestedEvaluator ev(d, pf::Task::cell_class);
  std::vector<pf::NestedQuery> queries;
  for (pf::ClassId c = 1; c < static_cast<pf::ClassId>(d.classes.size()); ++c) queries.push_back({pf::Metric::f1, c});
  for (auto _ : state) benchmark::DoNotOptimize(ev.evaluate(queries));
}
BENCHMARK(BM_Evaluate)->Arg(20)->Arg(80);

}  // namespace

BENCHMARK_MAIN();
