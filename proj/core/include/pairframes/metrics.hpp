#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "pairframes/confusion.hpp"
#include "pairframes/dataset.hpp"

namespace pf {

enum class Metric { precision, recall, f1, icc };

std::string_view to_string(Metric metric);
/// Accepts "precision", "recall", "f1" and "icc". Throws ArgumentError otherwise.
Metric parse_metric(std::string_view name);
/// ICC applies to count frames only; precision/recall/F1 to classification.
bool metric_applies(Metric metric, Task task);

/// Undefined values are empty optionals.
struct ClassMetrics {
  ClassId class_id = 0;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;
};

/// Rows hold ground truth: recall = m[c][c] / row_sum(c) and
/// precision = m[c][c] / col_sum(c). F1 is undefined when either input is
/// undefined or both are zero. Throws ArgumentError for classes outside the
/// matrix.
ClassMetrics per_class_metrics(const ConfusionMatrix& m, ClassId class_id);

/// One of precision/recall/f1 from per_class_metrics.
std::optional<double> classification_metric(const ConfusionMatrix& m, ClassId class_id, Metric metric);

/// n x 2 table of (reference count, candidate count) for one class.
struct PairedCounts {
  ClassId class_id = 1;
  std::vector<std::array<std::int64_t, 2>> rows;
};

/// Two-way random-effects, absolute-agreement, single-rater ICC(2,1) for two
/// raters (Shrout & Fleiss):
///
///   (MSR - MSE) / (MSR + MSE + (2/n)(MSC - MSE))
///
/// The result is clamped to [-1, 1]; a zero denominator with a negative
/// numerator (possible when n = 2) yields -1. Undefined when every entry is
/// identical. Throws ArgumentError when n < 2.
std::optional<double> icc_2_1(const PairedCounts& counts);

/// Same estimator where row i is repeated `multiplicity[i]` times. Returns
/// an empty optional instead of throwing when the effective n is below 2.
std::optional<double> icc_2_1(std::span<const std::array<std::int64_t, 2>> rows,
                              std::span<const std::uint32_t> multiplicity);

}  // namespace pf
