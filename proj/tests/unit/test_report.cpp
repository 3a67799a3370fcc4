#include <gtest/gtest.h>

#include <sstream>

#include "pairframes/error.hpp"
#include "pairframes/report.hpp"
#include "pairframes/simgen.hpp"
#include "support.hpp"

namespace {

using namespace pf;
using pf::testing::read_file;
using pf::testing::TempDir;

PanelConfig panel(Task task, bool noisy) {
  PanelConfig c;
  c.task = task;
  c.slides = 4;
  c.frames_per_slide = 2;
  c.frame_width_px = 24;
  c.frame_height_px = 24;
  c.classes = 2;
  c.pathologists = 3;
  c.seed = 8;
  if (noisy) {
    c.pathologist_error = {0.1, 0.05, 0.5, 0.7, 1.0};
    c.model_error = {0.15, 0.05, 0.5, 0.7, 1.0};
  }
  return c;
}

RunConfig run(Task task, std::size_t replicates = 50) {
  RunConfig r;
  r.task = task;
  r.resample.replicates = replicates;
  r.resample.master_seed = 3;
  return r;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ls(line);
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    rows.push_back(fields);
  }
  return rows;
}

TEST(RunConfig, Validation) {
  auto c = run(Task::cell_count);
  c.metrics = {Metric::f1};
  EXPECT_THROW(validate(c), ArgumentError);
  c = run(Task::tissue);
  c.margin = 0;
  EXPECT_THROW(validate(c), ArgumentError);
  c = run(Task::tissue);
  c.match_threshold.value = -1;
  EXPECT_THROW(validate(c), ArgumentError);
  EXPECT_EQ(effective_metrics(run(Task::cell_count)), (std::vector<Metric>{Metric::icc}));
  EXPECT_EQ(effective_metrics(run(Task::tissue)).size(), 3u);
}

TEST(RunEvaluate, IncompatibleMetricFailsBeforeLoading) {
  auto c = run(Task::cell_count);
  c.metrics = {Metric::f1};
  c.manifest = "/nonexistent/manifest.json";
  std::ostringstream err;
  EXPECT_EQ(run_evaluate(c, err), 1);
  EXPECT_NE(err.str().find("metric 'f1'"), std::string::npos);
}

TEST(RunEvaluate, MissingManifestIsReported) {
  auto c = run(Task::tissue);
  c.manifest = "/nonexistent/manifest.json";
  std::ostringstream err;
  EXPECT_EQ(run_evaluate(c, err), 1);
  EXPECT_EQ(err.str().rfind("error: ", 0), 0u);
}

TEST(ReportableClasses, EmptyListIsError) {
  EXPECT_THROW(reportable_classes(ClassRegistry(), false), ArgumentError);
  EXPECT_EQ(reportable_classes(ClassRegistry(), true), (std::vector<ClassId>{0}));
  EXPECT_EQ(reportable_classes(ClassRegistry({"a", "b"}), false), (std::vector<ClassId>{1, 2}));
}

TEST(EvaluateDataset, NoiselessPanelGivesZeroDifferencesAndIntervals) {
  for (auto task : {Task::tissue, Task::cell_class, Task::cell_count}) {
    const auto d = generate_panel(panel(task, false)).dataset;
    auto c = run(task);
    c.report_background = task == Task::tissue;
    const auto report = evaluate_dataset(d, c);
    for (const auto& e : report.entries) {
      EXPECT_EQ(e.nested.overall.mean_difference, 0.0);
      EXPECT_EQ(e.difference.ci_low, 0.0);
      EXPECT_EQ(e.difference.ci_high, 0.0);
    }
  }
}

TEST(EmitReport, RowAccountingAndColumns) {
  const auto d = generate_panel(panel(Task::cell_class, true)).dataset;
  auto c = run(Task::cell_class);
  c.metrics = {Metric::f1};
  c.dump_confusions = true;
  const auto report = evaluate_dataset(d, c);
  TempDir dir("emit");
  emit_report(report, dir.path());
  const auto rows = csv_rows(read_file(dir.path() / "nested_results.csv"));
  ASSERT_EQ(rows.size(), 1u + 2 * 4);  // header + 2 classes x (3 comparators + OVERALL)
  EXPECT_EQ(rows[0], (std::vector<std::string>{"metric", "class", "comparator", "model_score", "pathologist_score",
                                                "difference", "weight", "ci_low", "ci_high", "conclusion"}));
  EXPECT_EQ(rows[4][2], "OVERALL");
  EXPECT_FALSE(rows[4][7].empty());
  EXPECT_FALSE(rows[4][9].empty());
  EXPECT_TRUE(rows[1][7].empty());
  EXPECT_EQ(csv_rows(read_file(dir.path() / "bootstrap.csv")).size(), 1u + 2 * 3);
  EXPECT_EQ(csv_rows(read_file(dir.path() / "tests.csv")).size(), 1u + 2);
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "nested_results.json"));
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "run_log.txt"));
  // 3 pathologists x (2 other pathologists + model) ordered pairs.
  std::size_t confusions = 0;
  for (const auto& e : std::filesystem::directory_iterator(dir.path() / "confusions")) confusions += e.is_regular_file();
  EXPECT_EQ(confusions, 9u);
}

TEST(EmitReport, UndefinedOverallLeavesEmptyFieldsAndWarns) {
  // Nobody ever labels class 2.
  Dataset d;
  d.classes = ClassRegistry({"a", "b"});
  d.add_annotator("P1");
  d.add_annotator("P2");
  d.add_annotator("model", true);
  d.add_slide("S");
  d.add_frame({"f", "S", 2, 1, 1.0, Task::tissue});
  for (AnnotatorIndex a = 0; a < 3; ++a) d.set_annotation(0, a, LabelGrid{"f", d.annotators[a].id, 2, 1, {1, 0}});
  const auto report = evaluate_dataset(d, run(Task::tissue, 20));
  TempDir dir("undefined");
  emit_report(report, dir.path());
  bool found = false;
  for (const auto& row : csv_rows(read_file(dir.path() / "nested_results.csv"))) {
    if (row[1] == "b" && row[2] == "OVERALL") {
      found = true;
      EXPECT_TRUE(row[3].empty());
      EXPECT_TRUE(row[5].empty());
      EXPECT_EQ(row[9], "inconclusive");
    }
  }
  EXPECT_TRUE(found);
  EXPECT_NE(read_file(dir.path() / "run_log.txt").find("warning: "), std::string::npos);

  auto only_b = d;
  for (AnnotatorIndex a = 0; a < 3; ++a) only_b.set_annotation(0, a, LabelGrid{"f", d.annotators[a].id, 2, 1, {0, 0}});
  EXPECT_THROW(evaluate_dataset(only_b, run(Task::tissue, 20)), UndefinedStatisticError);
}

TEST(RunEvaluate, OutputsIndependentOfThreadCount) {
  TempDir data("det_data"), a("det_a"), b("det_b");
  write_panel(generate_panel(panel(Task::cell_class, true)), data.path());
  auto c = run(Task::cell_class, 100);
  c.manifest = data.path() / "manifest.json";
  c.output_dir = a.path();
  c.threads = 1;
  std::ostringstream err;
  ASSERT_EQ(run_evaluate(c, err), 0) << err.str();
  c.output_dir = b.path();
  c.threads = 4;
  ASSERT_EQ(run_evaluate(c, err), 0) << err.str();
  for (const char* f : {"nested_results.csv", "bootstrap.csv", "tests.csv", "nested_results.json", "run_log.txt"}) {
    EXPECT_EQ(read_file(a.path() / f), read_file(b.path() / f)) << f;
  }
}

}  // namespace
