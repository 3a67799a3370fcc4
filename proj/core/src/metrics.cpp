#include "pairframes/metrics.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "pairframes/error.hpp"

namespace pf {

std::string_view to_string(Metric metric) {
  switch (metric) {
    case Metric::precision: return "precision";
    case Metric::recall: return "recall";
    case Metric::f1: return "f1";
    case Metric::icc: return "icc";
  }
  return "unknown";
}

Metric parse_metric(std::string_view name) {
  if (name == "precision") return Metric::precision;
  if (name == "recall") return Metric::recall;
  if (name == "f1") return Metric::f1;
  if (name == "icc") return Metric::icc;
  throw ArgumentError(fmt::format("unknown metric '{}'", name));
}

bool metric_applies(Metric metric, Task task) {
  return (metric == Metric::icc) == (task == Task::cell_count);
}

ClassMetrics per_class_metrics(const ConfusionMatrix& m, ClassId class_id) {
  if (class_id < 0 || static_cast<std::size_t>(class_id) >= m.dim()) {
    throw ArgumentError(fmt::format("class {} is not registered for a {}-class matrix", class_id, m.dim()));
  }
  ClassMetrics out{class_id, std::nullopt, std::nullopt, std::nullopt};
  const auto hits = static_cast<double>(m.at(class_id, class_id));
  if (const auto col = m.col_sum(class_id); col > 0) out.precision = hits / static_cast<double>(col);
  if (const auto row = m.row_sum(class_id); row > 0) out.recall = hits / static_cast<double>(row);
  if (out.precision && out.recall && (*out.precision + *out.recall) > 0.0) {
    out.f1 = 2.0 * *out.precision * *out.recall / (*out.precision + *out.recall);
  }
  return out;
}

std::optional<double> classification_metric(const ConfusionMatrix& m, ClassId class_id, Metric metric) {
  const auto cm = per_class_metrics(m, class_id);
  switch (metric) {
    case Metric::precision: return cm.precision;
    case Metric::recall: return cm.recall;
    case Metric::f1: return cm.f1;
    case Metric::icc: break;
  }
  throw ArgumentError("ICC is not a confusion-matrix metric");
}

std::optional<double> icc_2_1(std::span<const std::array<std::int64_t, 2>> rows,
                              std::span<const std::uint32_t> multiplicity) {
  if (rows.size() != multiplicity.size()) {
    throw ArgumentError("icc_2_1: rows and multiplicities differ in length");
  }
  double n = 0.0;
  double sum_a = 0.0;
  double sum_b = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double w = multiplicity[i];
    n += w;
    sum_a += w * static_cast<double>(rows[i][0]);
    sum_b += w * static_cast<double>(rows[i][1]);
  }
  if (n < 2.0) return std::nullopt;

  const double mean_a = sum_a / n;
  const double mean_b = sum_b / n;
  const double grand = 0.5 * (mean_a + mean_b);

  double ss_rows = 0.0;
  double ss_error = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double w = multiplicity[i];
    if (w == 0.0) continue;
    const double a = static_cast<double>(rows[i][0]);
    const double b = static_cast<double>(rows[i][1]);
    const double row_mean = 0.5 * (a + b);
    const double dr = row_mean - grand;
    const double ea = a - row_mean - mean_a + grand;
    const double eb = b - row_mean - mean_b + grand;
    ss_rows += w * 2.0 * dr * dr;
    ss_error += w * (ea * ea + eb * eb);
  }
  const double ss_cols = n * ((mean_a - grand) * (mean_a - grand) + (mean_b - grand) * (mean_b - grand));

  const double ms_rows = ss_rows / (n - 1.0);
  const double ms_cols = ss_cols;  // k - 1 = 1
  const double ms_error = ss_error / (n - 1.0);

  const double numerator = ms_rows - ms_error;
  const double denominator = ms_rows + ms_error + (2.0 / n) * (ms_cols - ms_error);
  // The denominator is a nonnegative combination of the mean squares; treat
  // rounding residue as zero.
  const double scale = ms_rows + ms_error + ms_cols;
  if (scale == 0.0 || denominator <= 1e-12 * scale) {
    if (numerator < 0.0) return -1.0;
    return std::nullopt;
  }
  return std::clamp(numerator / denominator, -1.0, 1.0);
}

std::optional<double> icc_2_1(const PairedCounts& counts) {
  if (counts.rows.size() < 2) {
    throw ArgumentError(fmt::format("ICC(2,1) needs at least 2 rows, got {}", counts.rows.size()));
  }
  const std::vector<std::uint32_t> ones(counts.rows.size(), 1);
  return icc_2_1(counts.rows, ones);
}

}  // namespace pf
