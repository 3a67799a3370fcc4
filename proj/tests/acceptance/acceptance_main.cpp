// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "json.hpp"
#include "oracles/greedy_oracle.hpp"
#include "oracles/icc_oracle.hpp"
#include "oracles/nested_oracle.hpp"
#include "oracles/random_panel.hpp"
#include "pairframes/error.hpp"
#include "pairframes/report.hpp"
#include "pairframes/simgen.hpp"
#include "support.hpp"

namespace {

using namespace pf;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const char* title, const std::function<Outcome()>& check) {
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, fmt::format("exception: {}", e.what())};
  }
  if (!o.pass) ++failures;
  fmt::print("[{}] {} {}: {}\n", o.pass ? "PASS" : "FAIL", id, title, o.detail);
  std::fflush(stdout);
}

std::vector<Metric> metrics_for(Task task) {
  if (task == Task::cell_count) return {Metric::icc};
  return {Metric::precision, Metric::recall, Metric::f1};
}

// --- 1 -------------------------------------------------------------------

Outcome nested_oracle_equivalence() {
  constexpr double kTol = 1e-12;
  std::mt19937_64 rng(20240101);
  const EvalOptions options{{2.0, ThresholdUnit::px}, UndefinedPolicy::exclude};
  double max_err = 0.0;
  std::size_t mismatches = 0, comparisons = 0;
  const auto start = Clock::now();
  auto check = [&](const std::optional<double>& got, const std::optional<double>& want) {
    ++comparisons;
    if (got.has_value() != want.has_value()) {
      ++mismatches;
    } else if (got) {
      max_err = std::max(max_err, std::abs(*got - *want));
    }
  };
  for (int trial = 0; trial < 500; ++trial) {
    const auto task = static_cast<Task>(trial % 3);
    const auto d = pf::testing::random_panel(rng, task);
    for (auto metric : metrics_for(task)) {
      for (ClassId c = task == Task::cell_count ? 1 : 0; c < static_cast<ClassId>(d.classes.size()); ++c) {
        const auto want = oracle::nested_oracle(d, task, metric, c, 2.0);
        std::optional<NestedResult> got;
        try {
          got = evaluate_nested(d, task, metric, c, options);
        } catch (const UndefinedStatisticError&) {
        }
        check(got ? got->overall.mean_difference : std::nullopt, want.mean_difference);
        if (!got) continue;
        check(got->overall.model_mean, want.model_mean);
        check(got->overall.pathologist_mean, want.pathologist_mean);
        if (got->overall.weight != want.weight) ++mismatches;
        for (const auto& row : got->comparators) {
          const auto& w = want.rows.at(row.comparator);
          check(row.model_score, w.model);
          check(row.comparator_score, w.comparator);
          check(row.difference, w.difference);
          if (row.weight != w.weight) ++mismatches;
        }
      }
    }
  }
  const double elapsed = seconds_since(start);
  const bool pass = mismatches == 0 && max_err <= kTol && elapsed < 10.0;
  return {pass, fmt::format("500 panels, {} values, {} definedness/weight mismatches, max |err| {:.3g} (tol {:g}), "
                            "{:.2f} s (limit 10 s)",
                            comparisons, mismatches, max_err, kTol, elapsed)};
}

// --- 2 -------------------------------------------------------------------

Outcome icc_oracle_equivalence() {
  constexpr double kTol = 1e-10;
  auto icc = [](std::vector<std::array<std::int64_t, 2>> rows) { return icc_2_1(PairedCounts{1, std::move(rows)}); };
  bool pinned = icc({{1, 1}, {2, 2}, {3, 3}}) == 1.0 &&
                std::abs(*icc({{1, 2}, {2, 3}, {3, 4}}) - 2.0 / 3.0) <= kTol && icc({{1, 3}, {3, 1}}) == -1.0;

  std::mt19937_64 rng(777);
  std::uniform_int_distribution<int> size(2, 8);
  std::uniform_int_distribution<std::int64_t> value(0, 20);
  double max_err = 0.0;
  int mismatches = 0, undefined = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<std::array<std::int64_t, 2>> rows(static_cast<std::size_t>(size(rng)));
    // Every tenth table is a small-range one so degenerate cases turn up.
    const std::int64_t cap = trial % 10 == 0 ? 1 : 20;
    for (auto& r : rows) r = {value(rng) % (cap + 1), value(rng) % (cap + 1)};
    const auto got = icc(rows);
    const auto want = oracle::icc_anova(rows);
    if (got.has_value() != want.has_value()) {
      ++mismatches;
    } else if (got) {
      max_err = std::max(max_err, std::abs(*got - *want));
    } else {
      ++undefined;
    }
  }
  return {pinned && mismatches == 0 && max_err <= kTol,
          fmt::format("pinned 1, 2/3, -1 {}; 1000 tables ({} undefined), {} definedness mismatches, max |err| {:.3g} "
                      "(tol {:g})",
                      pinned ? "ok" : "WRONG", undefined, mismatches, max_err, kTol)};
}

// --- 3 -------------------------------------------------------------------

Outcome greedy_oracle_equivalence() {
  std::mt19937_64 rng(31337);
  std::uniform_int_distribution<int> count(0, 6), cls(1, 3);
  std::uniform_real_distribution<double> coord(0.0, 20.0), thr(0.5, 12.0);
  auto random_set = [&] {
    CellPointSet s{"F", "A", {}};
    for (int n = count(rng); n > 0; --n) s.points.push_back({coord(rng), coord(rng), cls(rng)});
    return s;
  };
  int oracle_fail = 0, symmetry_fail = 0, monotone_fail = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto a = random_set();
    const auto b = random_set();
    const double t = thr(rng);
    const auto m = greedy_match(a, b, t);
    if (m != oracle::greedy_sweep(a, b, t)) ++oracle_fail;

    const auto r = greedy_match(b, a, t);
    MatchedPairs back{{}, r.singletons_b, r.singletons_a};
    for (const auto& p : r.pairs) back.pairs.push_back({p.index_b, p.index_a, p.distance});
    if (back != m) ++symmetry_fail;

    // A larger threshold keeps every earlier pair, in order, and may add more.
    const auto wider = greedy_match(a, b, t * 1.5);
    if (wider.pairs.size() < m.pairs.size() ||
        !std::equal(m.pairs.begin(), m.pairs.end(), wider.pairs.begin())) {
      ++monotone_fail;
    }
  }
  return {oracle_fail == 0 && symmetry_fail == 0 && monotone_fail == 0,
          fmt::format("1000 frames, |a|,|b| <= 6: oracle mismatches {}, symmetry failures {}, monotonicity failures {}",
                      oracle_fail, symmetry_fail, monotone_fail)};
}

// --- 4 -------------------------------------------------------------------

Outcome zero_noise_fixed_point() {
  int checked = 0, bad = 0;
  for (auto task : {Task::tissue, Task::cell_class, Task::cell_count}) {
    PanelConfig c;
    c.task = task;
    c.slides = 6;
    c.frames_per_slide = 3;
    c.pathologists = 4;
    c.coverage = 0.8;
    c.seed = 404;
    const auto d = generate_panel(c).dataset;
    RunConfig run;
    run.task = task;
    // Background has mass on tissue frames only; cell confusions never
    // populate (0, 0), so it is undefined for cells.
    run.report_background = task == Task::tissue;
    run.resample.replicates = 200;
    run.resample.master_seed = 4;
    const auto rep = evaluate_dataset(d, run);
    for (const auto& e : rep.entries) {
      ++checked;
      bool ok = e.nested.overall.mean_difference == 0.0 && e.difference.ci_low == 0.0 && e.difference.ci_high == 0.0;
      for (const auto& row : e.nested.comparators) ok = ok && row.difference == 0.0;
      bad += ok ? 0 : 1;
    }
  }
  return {bad == 0 && checked == 3 * 4 + 3 * 3 + 3,
          fmt::format("{} (task, metric, class) entries, {} with nonzero difference or CI", checked, bad)};
}

// --- 5 -------------------------------------------------------------------

Outcome bootstrap_calibration() {
  constexpr int kDatasets = 200;
  const auto start = Clock::now();
  std::array<int, 3> covered{};
  std::array<int, 3> defined{};
  for (int k = 0; k < kDatasets; ++k) {
    PanelConfig c;
    c.task = Task::cell_class;
    c.slides = 10;
    c.frames_per_slide = 5;
    c.pathologists = 4;
    c.seed = 5000 + static_cast<std::uint64_t>(k);
    c.pathologist_error = {0.1, 0.0, 0.0, 1.0, 0.0};
    c.model_error = c.pathologist_error;
    const auto d = generate_panel(c).dataset;
    const NestedEvaluator ev(d, Task::cell_class);
    const std::vector<NestedQuery> queries{{Metric::f1, 1}, {Metric::f1, 2}, {Metric::f1, 3}};
    const auto stat = [&](std::span<const std::uint32_t> m) {
      std::vector<std::optional<double>> out;
      for (const auto& r : ev.evaluate(queries, m)) out.push_back(r.overall.mean_difference);
      return out;
    };
    const auto boots = bootstrap_statistics(FrameScope(d, ev.frames()), stat, 3,
                                            {ResampleStrategy::hierarchical, 500, 0.05, static_cast<std::uint64_t>(k)});
    for (int q = 0; q < 3; ++q) {
      if (!boots[q].ci_low) continue;
      ++defined[q];
      if (*boots[q].ci_low <= 0.0 && 0.0 <= *boots[q].ci_high) ++covered[q];
    }
  }
  const double elapsed = seconds_since(start);
  bool pass = elapsed < 600.0;
  std::string rates;
  for (int q = 0; q < 3; ++q) {
    const double rate = static_cast<double>(covered[q]) / kDatasets;
    pass = pass && defined[q] == kDatasets && rate >= 0.90;
    rates += fmt::format("{}class{} {:.1f}%", q ? ", " : "", q + 1, 100.0 * rate);
  }
  return {pass, fmt::format("{} datasets x 500 replicates, CI coverage of 0 per class: {} (need >= 90%), {:.1f} s "
                            "(limit 600 s)",
                            kDatasets, rates, elapsed)};
}

// --- 6 -------------------------------------------------------------------

Outcome sensitivity() {
  std::ifstream in(std::filesystem::path(PAIRFRAMES_REFERENCE_DIR) / "sensitivity_expected.json");
  if (!in) return {false, "missing sensitivity_expected.json"};
  const auto expected = nlohmann::json::parse(in);
  const auto& cfg = expected["config"];

  PanelConfig c;
  c.task = Task::cell_class;
  c.slides = cfg["slides"];
  c.frames_per_slide = cfg["frames_per_slide"];
  c.frame_width_px = cfg["width"];
  c.frame_height_px = cfg["height"];
  c.microns_per_pixel = cfg["mpp"];
  c.classes = cfg["classes"];
  c.pathologists = cfg["pathologists"];
  c.cells_per_class = cfg["cells_per_class"];
  c.seed = cfg["seed"];
  const auto error = [](const nlohmann::json& e) {
    return ErrorModel{e[0].get<double>(), e[1].get<double>(), e[2].get<double>(), e[3].get<double>(), 0.0};
  };
  c.pathologist_error = error(cfg["pathologist_error"]);
  c.model_error = error(cfg["model_error"]);
  const auto d = generate_panel(c).dataset;

  RunConfig run;
  run.task = Task::cell_class;
  run.metrics = {Metric::f1};
  run.match_threshold = {cfg["threshold_microns"].get<double>(), ThresholdUnit::micron};
  run.resample = {ResampleStrategy::hierarchical, cfg["replicates"].get<std::size_t>(), cfg["alpha"].get<double>(),
                  cfg["master_seed"].get<std::uint64_t>()};
  run.margin = cfg["margin"];
  run.test_mode = TestMode::non_inferiority;
  const auto rep = evaluate_dataset(d, run);

  constexpr double kTol = 1e-9;
  bool pass = d.frames.size() == 200 && rep.entries.size() == expected["results"].size();
  std::string detail = fmt::format("{} frames", d.frames.size());
  for (std::size_t k = 0; pass && k < rep.entries.size(); ++k) {
    const auto& e = rep.entries[k];
    const auto& want = expected["results"][k];
    const double diff = *e.nested.overall.mean_difference;
    const double lo = *e.difference.ci_low, hi = *e.difference.ci_high;
    const bool matches = std::abs(diff - want["difference"].get<double>()) <= kTol &&
                         std::abs(lo - want["ci_low"].get<double>()) <= kTol &&
                         std::abs(hi - want["ci_high"].get<double>()) <= kTol &&
                         std::string(to_string(e.test.conclusion)) == want["conclusion"].get<std::string>();
    const bool rejects = hi < -run.margin;
    const bool acceptable = e.test.conclusion == Conclusion::inconclusive || rejects;
    pass = matches && acceptable;
    detail += fmt::format("; {} diff {:.4f} CI [{:.4f}, {:.4f}] {}{}{}", d.classes.name(e.nested.class_id), diff, lo,
                          hi, to_string(e.test.conclusion), rejects ? " (CI below -margin)" : "",
                          matches ? "" : " MISMATCH vs reference");
  }
  return {pass, detail};
}

// --- 7 -------------------------------------------------------------------

Outcome determinism() {
  pf::testing::TempDir work("acceptance_det");
  std::vector<std::string> differing;
  int runs = 0;
  for (auto task : {Task::tissue, Task::cell_class, Task::cell_count}) {
    PanelConfig c;
    c.task = task;
    c.slides = 5;
    c.frames_per_slide = 4;
    c.coverage = 0.8;
    c.seed = 71;
    c.pathologist_error = {0.1, 0.05, 0.5, 1.0, 1.0};
    c.model_error = {0.15, 0.05, 0.5, 1.0, 1.0};
    const auto data = work.path() / std::string(to_string(task));
    write_panel(generate_panel(c), data);
    RunConfig run;
    run.task = task;
    run.manifest = data / "manifest.json";
    run.dump_confusions = true;
    run.resample.replicates = 300;
    run.resample.master_seed = 99;
    std::vector<std::filesystem::path> outs;
    for (unsigned threads : {1u, 1u, 4u}) {
      run.threads = threads;
      run.output_dir = data / fmt::format("out{}", runs++);
      std::ostringstream err;
      if (run_evaluate(run, err) != 0) return {false, "run_evaluate failed: " + err.str()};
      outs.push_back(run.output_dir);
    }
    for (const auto& e : std::filesystem::recursive_directory_iterator(outs[0])) {
      if (!e.is_regular_file()) continue;
      const auto rel = std::filesystem::relative(e.path(), outs[0]);
      const auto ref = pf::testing::read_file(e.path());
      for (std::size_t k = 1; k < outs.size(); ++k) {
        if (pf::testing::read_file(outs[k] / rel) != ref) differing.push_back(rel.string());
      }
    }
  }
  return {differing.empty(),
          fmt::format("{} runs over 3 tasks (threads 1, 1, 4): {} differing files{}", runs, differing.size(),
                      differing.empty() ? "" : " e.g. " + differing.front())};
}

// --- 8 -------------------------------------------------------------------

Outcome scale() {
  pf::testing::TempDir work("acceptance_scale");
  const auto start = Clock::now();
  for (auto task : {Task::cell_class, Task::cell_count}) {
    PanelConfig c;
    c.task = task;
    c.slides = 83;
    c.total_frames = 315;
    c.pathologists = 4;
    c.seed = 315;
    c.pathologist_error = {0.1, 0.05, 0.5, 1.0, 1.0};
    c.model_error = {0.1, 0.05, 0.5, 1.0, 1.0};
    const auto data = work.path() / std::string(to_string(task));
    write_panel(generate_panel(c), data);
    RunConfig run;
    run.task = task;
    run.manifest = data / "manifest.json";
    run.output_dir = data / "out";
    run.resample.replicates = 1000;
    std::ostringstream err;
    if (run_evaluate(run, err) != 0) return {false, "run_evaluate failed: " + err.str()};
  }
  const double elapsed = seconds_since(start);
  return {elapsed < 60.0, fmt::format("315 frames / 83 slides / 4 pathologists, 1000 replicates, cell_class + "
                                      "cell_count end to end: {:.1f} s (limit 60 s, 1 thread)",
                                      elapsed)};
}

// --- 9 -------------------------------------------------------------------

Outcome conservation() {
  std::size_t frame_checks = 0, weight_checks = 0;
  std::vector<std::string> problems;
  auto fail = [&](std::string what) {
    if (problems.size() < 3) problems.push_back(std::move(what));
  };
  for (auto task : {Task::tissue, Task::cell_class, Task::cell_count}) {
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
      PanelConfig c;
      c.task = task;
      c.slides = 4;
      c.frames_per_slide = 3;
      c.frame_width_px = 40;
      c.frame_height_px = 32;
      c.pathologists = 3 + static_cast<int>(seed % 2);
      c.coverage = seed <= 3 ? 1.0 : 0.7;
      c.seed = seed;
      c.pathologist_error = {0.1, 0.1, 1.0, 1.5, 1.0};
      c.model_error = {0.2, 0.1, 1.0, 1.5, 2.0};
      const auto d = generate_panel(c).dataset;
      const NestedEvaluator ev(d, task);
      const auto n = d.annotators.size();

      for (AnnotatorIndex r = 0; r < n && task != Task::cell_count; ++r) {
        for (AnnotatorIndex x = 0; x < n; ++x) {
          if (x == r) continue;
          double area = 0;
          for (FrameIndex f = 0; f < d.frames.size(); ++f) {
            const auto* ar = d.annotation(f, r);
            const auto* ax = d.annotation(f, x);
            if (!ar || !ax) continue;
            ++frame_checks;
            if (task == Task::tissue) {
              const auto m = pixel_confusion(std::get<LabelGrid>(*ar), std::get<LabelGrid>(*ax), d.classes);
              area += d.frames[f].area_px();
              if (m.total() != static_cast<std::int64_t>(d.frames[f].area_px())) fail("pixel total != area");
              const auto* cached = ev.frame_confusion(f, r, x);
              if (r == *d.model() ? cached != nullptr : (!cached || *cached != m)) {
                fail("cached frame confusion differs");
              }
            } else {
              const auto& a = std::get<CellPointSet>(*ar);
              const auto& b = std::get<CellPointSet>(*ax);
              const auto mp = greedy_match(a, b, MatchThreshold{}, d.frames[f]);
              const auto m = object_confusion(mp, a, b, d.classes);
              const auto expected = mp.pairs.size() + mp.singletons_a.size() + mp.singletons_b.size();
              if (m.total() != static_cast<std::int64_t>(expected)) fail("cell total != pairs + singletons");
              if (mp.pairs.size() * 2 + mp.singletons_a.size() + mp.singletons_b.size() != a.size() + b.size()) {
                fail("matching lost points");
              }
              // The model is never a reference, so the evaluator caches no such slot.
              const auto* cached = ev.frame_confusion(f, r, x);
              if (r == *d.model() ? cached != nullptr : (!cached || *cached != m)) {
                fail("cached frame confusion differs");
              }
            }
          }
          if (task == Task::tissue && r != *d.model()) {
            const auto pair = ev.pair_confusion(r, x);
            if (static_cast<double>(pair.total()) != area) fail("aggregated pixel total != common area");
          }
        }
      }

      for (auto metric : metrics_for(task)) {
        for (ClassId cls = 1; cls < static_cast<ClassId>(d.classes.size()); ++cls) {
          const std::vector<NestedQuery> q{{metric, cls}};
          const auto res = ev.evaluate(q)[0];
          double sum = 0;
          for (const auto& row : res.comparators) {
            ++weight_checks;
            sum += row.weight;
            const auto p = d.annotator_index(row.comparator);
            double expected = 0;
            for (auto ref : d.pathologists()) {
              if (ref == p) continue;
              const auto frames = common_frames(d, p, ref, task);
              const auto& rid = d.annotators[ref].id;
              const auto sp = pairwise_score(d, rid, row.comparator, frames, metric, cls);
              const auto sm = pairwise_score(d, rid, d.annotators[*d.model()].id, frames, metric, cls);
              if (sp.value && sm.value) expected += static_cast<double>(frames.size());
            }
            if (row.weight != expected) fail(fmt::format("comparator weight {} != {}", row.weight, expected));
          }
          ++weight_checks;
          if (res.overall.weight != sum) fail("overall weight != sum of comparator weights");
        }
      }
    }
  }
  std::string detail = fmt::format("{} frame-pair tallies, {} weight reconciliations", frame_checks, weight_checks);
  for (const auto& p : problems) detail += "; " + p;
  return {problems.empty(), detail};
}

}  // namespace

int main() {
  report(1, "nested oracle equivalence", nested_oracle_equivalence);
  report(2, "ICC(2,1) oracle equivalence", icc_oracle_equivalence);
  report(3, "greedy matching oracle equivalence", greedy_oracle_equivalence);
  report(4, "zero-noise fixed point", zero_noise_fixed_point);
  report(5, "bootstrap calibration", bootstrap_calibration);
  report(6, "sensitivity vs pinned reference", sensitivity);
  report(7, "determinism", determinism);
  report(8, "scale", scale);
  report(9, "conservation invariants", conservation);
  fmt::print("{} of 9 criteria passed\n", 9 - failures);
  return failures == 0 ? 0 : 1;
}
