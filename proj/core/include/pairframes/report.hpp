#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "pairframes/bootstrap.hpp"
#include "pairframes/dataset.hpp"
#include "pairframes/metrics.hpp"
#include "pairframes/nested.hpp"

namespace pf {

/// Everything one `evaluate` run needs. All randomness comes from
/// resample.master_seed.
struct RunConfig {
  Task task = Task::cell_class;
  /// Empty selects the task's defaults (precision, recall, f1 or icc).
  std::vector<Metric> metrics;
  MatchThreshold match_threshold{};
  bool report_background = false;
  UndefinedPolicy undefined_policy = UndefinedPolicy::exclude;
  ResampleSpec resample{};
  double margin = 0.05;
  TestMode test_mode = TestMode::non_inferiority;
  std::filesystem::path manifest;
  std::filesystem::path output_dir;
  bool dump_confusions = false;
  /// Worker threads for bootstrap replicates; outputs do not depend on it.
  unsigned threads = 1;
};

/// Checks task/metric compatibility and numeric ranges without touching the
/// file system. Throws ArgumentError.
void validate(const RunConfig& config);

std::vector<Metric> effective_metrics(const RunConfig& config);

/// Class ids reported for a registry: the nonzero classes, plus background
/// when requested. Throws ArgumentError when the list would be empty.
std::vector<ClassId> reportable_classes(const ClassRegistry& classes, bool include_background);

/// One (metric, class) line of the report.
struct ReportEntry {
  NestedResult nested;
  BootstrapResult model_mean;
  BootstrapResult pathologist_mean;
  BootstrapResult difference;
  TestOutcome test;
};

struct EvaluationReport {
  RunConfig config;
  ClassRegistry classes;
  std::vector<ReportEntry> entries;
  /// Pair-aggregated confusions (reference, candidate) when dumping was asked
  /// for on a classification task.
  std::vector<ConfusionMatrix> confusions;
  std::vector<std::string> warnings;
};

/// Runs the nested evaluation, bootstrap and margin test for every
/// requested (metric, class). Undefined results are kept and noted in
/// `warnings`; throws UndefinedStatisticError only when every overall
/// difference is undefined.
EvaluationReport evaluate_dataset(const Dataset& d, const RunConfig& config);

/// Writes nested_results.csv, nested_results.json, bootstrap.csv, tests.csv,
/// run_log.txt and, if present, confusions/*.csv into `dir`.
///
/// nested_results.csv columns: metric, class, comparator, model_score,
/// pathologist_score, difference, weight, ci_low, ci_high, conclusion. Each
/// (metric, class) has one row per comparator followed by an OVERALL row;
/// CI and conclusion are filled on OVERALL rows only. Undefined values are
/// empty fields.
void emit_report(const EvaluationReport& report, const std::filesystem::path& dir);

/// Full pipeline: validate config, load the manifest, evaluate, emit.
/// Returns 0 on success; otherwise writes a diagnostic to `err` and returns
/// 1.
int run_evaluate(const RunConfig& config, std::ostream& err);

}  // namespace pf
