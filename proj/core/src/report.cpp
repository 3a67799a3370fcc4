#include "pairframes/report.hpp"

#include <algorithm>
#include <ostream>

#include <fmt/format.h>

#include "csv.hpp"
#include "io.hpp"
#include "json.hpp"
#include "pairframes/error.hpp"

namespace pf {

namespace {

constexpr const char* kOverall = "OVERALL";

std::string value_field(const std::optional<double>& v) { return v ? csv::format_double(*v) : std::string(); }

nlohmann::json json_value(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

nlohmann::json bootstrap_json(const BootstrapResult& b) {
  return {{"point_estimate", json_value(b.point_estimate)},
          {"ci_low", json_value(b.ci_low)},
          {"ci_high", json_value(b.ci_high)},
          {"undefined_replicates", b.undefined_replicate_count}};
}

}  // namespace

void validate(const RunConfig& c) {
  for (auto m : effective_metrics(c)) {
    if (!metric_applies(m, c.task)) {
      throw ArgumentError(fmt::format("metric '{}' is not available for task '{}'", to_string(m), to_string(c.task)));
    }
  }
  if (!(c.match_threshold.value > 0.0)) throw ArgumentError("match threshold must be positive");
  validate(c.resample);
  if (!(c.margin > 0.0)) throw ArgumentError("margin must be positive");
}

std::vector<Metric> effective_metrics(const RunConfig& c) {
  if (!c.metrics.empty()) return c.metrics;
  if (c.task == Task::cell_count) return {Metric::icc};
  return {Metric::precision, Metric::recall, Metric::f1};
}

std::vector<ClassId> reportable_classes(const ClassRegistry& classes, bool include_background) {
  std::vector<ClassId> out;
  for (std::size_t c = include_background ? 0 : 1; c < classes.size(); ++c) out.push_back(static_cast<ClassId>(c));
  if (out.empty()) throw ArgumentError("no reportable classes");
  return out;
}

EvaluationReport evaluate_dataset(const Dataset& d, const RunConfig& config) {
  validate(config);
  EvaluationReport report;
  report.config = config;
  report.classes = d.classes;

  const EvalOptions options{config.match_threshold, config.undefined_policy};
  const NestedEvaluator evaluator(d, config.task, options);
  if (evaluator.frames().empty()) {
    throw ArgumentError(fmt::format("dataset has no {} frames", to_string(config.task)));
  }

  std::vector<NestedQuery> queries;
  for (auto metric : effective_metrics(config)) {
    for (auto cls : reportable_classes(d.classes, config.report_background)) queries.push_back({metric, cls});
  }

  const auto point = evaluator.evaluate(queries);
  const FrameScope scope(d, evaluator.frames());
  const auto stat = [&](std::span<const std::uint32_t> m) {
    std::vector<std::optional<double>> out;
    out.reserve(queries.size() * 3);
    for (const auto& r : evaluator.evaluate(queries, m)) {
      out.push_back(r.overall.model_mean);
      out.push_back(r.overall.pathologist_mean);
      out.push_back(r.overall.mean_difference);
    }
    return out;
  };
  const auto boots = bootstrap_statistics(scope, stat, queries.size() * 3, config.resample, config.threads);

  bool any_defined = false;
  for (std::size_t q = 0; q < queries.size(); ++q) {
    ReportEntry entry{point[q], boots[3 * q], boots[3 * q + 1], boots[3 * q + 2], {}};
    entry.test = hypothesis_test(entry.difference, config.margin, config.test_mode);
    const auto label = fmt::format("{} / {}", to_string(queries[q].metric), d.classes.name(queries[q].class_id));
    if (!entry.nested.overall.defined()) {
      report.warnings.push_back(fmt::format("{}: overall difference undefined (every weight is zero)", label));
    } else {
      any_defined = true;
    }
    for (const auto& row : entry.nested.comparators) {
      if (!row.difference) {
        report.warnings.push_back(fmt::format("{}: comparator '{}' has no defined reference scores", label, row.comparator));
      }
    }
    if (entry.difference.undefined_replicate_count > 0) {
      report.warnings.push_back(fmt::format("{}: {} of {} bootstrap replicates undefined", label,
                                            entry.difference.undefined_replicate_count, config.resample.replicates));
    }
    report.entries.push_back(std::move(entry));
  }
  if (!any_defined) throw UndefinedStatisticError("every requested statistic is undefined");

  if (config.dump_confusions && config.task != Task::cell_count) {
    const auto model = *d.model();
    auto participants = d.pathologists();
    participants.push_back(model);
    for (auto r : d.pathologists()) {
      for (auto c : participants) {
        if (c != r) report.confusions.push_back(evaluator.pair_confusion(r, c));
      }
    }
  }
  return report;
}

void emit_report(const EvaluationReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw InputError(fmt::format("cannot create output directory '{}'", dir.string()));
  }
  const auto& classes = report.classes;
  const auto& cfg = report.config;

  std::string nested = csv::join({"metric", "class", "comparator", "model_score", "pathologist_score", "difference",
                                  "weight", "ci_low", "ci_high", "conclusion"}) + "\n";
  std::string boot = csv::join({"metric", "class", "quantity", "point_estimate", "ci_low", "ci_high", "replicates",
                                "undefined_replicates", "strategy", "alpha", "seed"}) + "\n";
  std::string tests = csv::join({"metric", "class", "mode", "margin", "difference", "ci_low", "ci_high",
                                 "conclusion"}) + "\n";
  nlohmann::json results = nlohmann::json::array();

  for (const auto& e : report.entries) {
    const std::string metric(to_string(e.nested.metric));
    const auto& cls = classes.name(e.nested.class_id);
    nlohmann::json comparators = nlohmann::json::array();
    for (const auto& row : e.nested.comparators) {
      nested += csv::join({metric, cls, row.comparator, value_field(row.model_score), value_field(row.comparator_score),
                           value_field(row.difference), csv::format_double(row.weight), "", "", ""}) + "\n";
      comparators.push_back({{"comparator", row.comparator},
                             {"model_score", json_value(row.model_score)},
                             {"comparator_score", json_value(row.comparator_score)},
                             {"difference", json_value(row.difference)},
                             {"weight", row.weight}});
    }
    const auto& o = e.nested.overall;
    const std::string conclusion(to_string(e.test.conclusion));
    nested += csv::join({metric, cls, kOverall, value_field(o.model_mean), value_field(o.pathologist_mean),
                         value_field(o.mean_difference), csv::format_double(o.weight), value_field(e.difference.ci_low),
                         value_field(e.difference.ci_high), conclusion}) + "\n";

    const std::pair<const char*, const BootstrapResult*> quantities[] = {
        {"model_mean", &e.model_mean}, {"pathologist_mean", &e.pathologist_mean}, {"mean_difference", &e.difference}};
    for (const auto& [name, b] : quantities) {
      boot += csv::join({metric, cls, name, value_field(b->point_estimate), value_field(b->ci_low),
                         value_field(b->ci_high), std::to_string(b->spec.replicates),
                         std::to_string(b->undefined_replicate_count), std::string(to_string(b->spec.strategy)),
                         csv::format_double(b->spec.alpha), std::to_string(b->spec.master_seed)}) + "\n";
    }
    tests += csv::join({metric, cls, std::string(to_string(e.test.mode)), csv::format_double(e.test.margin),
                        value_field(o.mean_difference), value_field(e.difference.ci_low),
                        value_field(e.difference.ci_high), conclusion}) + "\n";

    results.push_back({{"metric", metric},
                       {"class", cls},
                       {"class_id", e.nested.class_id},
                       {"comparators", comparators},
                       {"overall",
                        {{"model_mean", json_value(o.model_mean)},
                         {"pathologist_mean", json_value(o.pathologist_mean)},
                         {"mean_difference", json_value(o.mean_difference)},
                         {"weight", o.weight}}},
                       {"bootstrap",
                        {{"model_mean", bootstrap_json(e.model_mean)},
                         {"pathologist_mean", bootstrap_json(e.pathologist_mean)},
                         {"mean_difference", bootstrap_json(e.difference)}}},
                       {"test",
                        {{"mode", std::string(to_string(e.test.mode))},
                         {"margin", e.test.margin},
                         {"conclusion", conclusion}}}});
  }

  nlohmann::json root{{"task", std::string(to_string(cfg.task))},
                      {"resample",
                       {{"strategy", std::string(to_string(cfg.resample.strategy))},
                        {"replicates", cfg.resample.replicates},
                        {"alpha", cfg.resample.alpha},
                        {"seed", cfg.resample.master_seed}}},
                      {"undefined_policy", std::string(to_string(cfg.undefined_policy))},
                      {"results", results}};

  detail::write_text(dir / "nested_results.csv", nested);
  detail::write_text(dir / "bootstrap.csv", boot);
  detail::write_text(dir / "tests.csv", tests);
  detail::write_text(dir / "nested_results.json", root.dump(2) + "\n");

  std::string log;
  for (const auto& w : report.warnings) log += "warning: " + w + "\n";
  detail::write_text(dir / "run_log.txt", log);

  if (!report.confusions.empty()) {
    std::filesystem::create_directories(dir / "confusions", ec);
    if (ec) throw InputError(fmt::format("cannot create '{}'", (dir / "confusions").string()));
    for (const auto& m : report.confusions) {
      const auto name = fmt::format("{}__{}.csv", detail::safe_name(m.row_annotator()), detail::safe_name(m.col_annotator()));
      detail::write_text(dir / "confusions" / name, confusion_csv(m, classes));
    }
  }
}

int run_evaluate(const RunConfig& config, std::ostream& err) {
  try {
    validate(config);
    std::vector<std::string> load_warnings;
    const auto dataset = parse_manifest(config.manifest, &load_warnings);
    auto report = evaluate_dataset(dataset, config);
    report.warnings.insert(report.warnings.begin(), load_warnings.begin(), load_warnings.end());
    emit_report(report, config.output_dir);
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace pf
