#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pairframes/align.hpp"
#include "pairframes/confusion.hpp"
#include "pairframes/dataset.hpp"
#include "pairframes/metrics.hpp"

namespace pf {

/// What an undefined pairwise metric (zero denominator, too few frames)
/// contributes to the nested averages.
enum class UndefinedPolicy { exclude, as_zero, as_one };

std::string_view to_string(UndefinedPolicy policy);
UndefinedPolicy parse_undefined_policy(std::string_view name);

struct EvalOptions {
  MatchThreshold match_threshold{};
  UndefinedPolicy undefined_policy = UndefinedPolicy::exclude;
};

/// Frames annotated by both annotators, in dataset order. Throws
/// ArgumentError for unknown annotators.
std::vector<FrameIndex> common_frames(const Dataset& d, std::string_view x, std::string_view y);
/// Same, restricted to frames of one task.
std::vector<FrameIndex> common_frames(const Dataset& d, AnnotatorIndex x, AnnotatorIndex y,
                                      Task task);

struct PairwiseScore {
  std::string reference;
  std::string candidate;
  ClassId class_id = 0;
  Metric metric = Metric::f1;
  std::optional<double> value;
  /// Number of frames behind `value`; 0 when the value is undefined.
  double weight = 0.0;
};

/// One metric for one (reference, candidate) pair over `frames`, which may
/// repeat entries (each occurrence counts once). Classification metrics come
/// from the confusion matrix summed over the frames with the reference on
/// rows; ICC uses one (reference, candidate) count row per frame.
///
/// Throws ArgumentError if the frames mix tasks, the metric does not apply to
/// the task, or either annotator lacks an annotation on a listed frame.
PairwiseScore pairwise_score(const Dataset& d, std::string_view reference,
                             std::string_view candidate, std::span<const FrameIndex> frames,
                             Metric metric, ClassId class_id, const EvalOptions& options = {});

/// Outer-loop row: the held-out comparator versus the model, both scored
/// against the remaining panel on identical frame sets.
struct ComparatorRow {
  std::string comparator;
  std::optional<double> model_score;
  std::optional<double> comparator_score;
  std::optional<double> difference;
  double weight = 0.0;
};

struct NestedSummary {
  std::optional<double> model_mean;
  std::optional<double> pathologist_mean;
  std::optional<double> mean_difference;
  double weight = 0.0;

  bool defined() const { return mean_difference.has_value(); }
};

struct NestedResult {
  Task task = Task::tissue;
  Metric metric = Metric::f1;
  ClassId class_id = 0;
  /// Sorted by comparator id.
  std::vector<ComparatorRow> comparators;
  NestedSummary overall;
};

struct NestedQuery {
  Metric metric = Metric::f1;
  ClassId class_id = 1;
};

/// Nested pairwise engine for one task of a dataset.
///
/// Construction aligns and tallies every (reference, candidate) pair on every
/// frame once; evaluate() then only sums cached per-frame tables, which makes
/// it cheap enough to call once per bootstrap replicate.
///
/// For each comparator p and each other pathologist r, the frames used are
/// those annotated by both p and r. Over those frames the comparator is
/// scored as candidate against r, and so is the model. A reference whose
/// score is undefined on either side is dropped from both inner averages.
/// Inner and outer averages are weighted by frame counts (with bootstrap
/// multiplicity). Pathologists are processed in id order, so the result does
/// not depend on the order annotators were registered in.
class NestedEvaluator {
 public:
  /// Throws ArgumentError when the dataset has no model or fewer than two
  /// pathologists.
  NestedEvaluator(const Dataset& d, Task task, const EvalOptions& options = {});

  const Dataset& dataset() const { return *dataset_; }
  Task task() const { return task_; }
  /// Frames of this evaluator's task, in dataset order.
  const std::vector<FrameIndex>& frames() const { return frames_; }

  /// `multiplicity` is indexed by dataset frame index; frames outside the
  /// task are ignored. Undefined results are reported, never thrown.
  std::vector<NestedResult> evaluate(std::span<const NestedQuery> queries,
                                     std::span<const std::uint32_t> multiplicity) const;
  /// Every frame once.
  std::vector<NestedResult> evaluate(std::span<const NestedQuery> queries) const;

  /// Cached single-frame confusion (classification tasks only); nullptr if
  /// either annotator did not annotate the frame or the reference is the
  /// model, which never serves as ground truth.
  const ConfusionMatrix* frame_confusion(FrameIndex frame, AnnotatorIndex reference,
                                         AnnotatorIndex candidate) const;
  /// Confusion summed over every task frame the pair shares.
  ConfusionMatrix pair_confusion(AnnotatorIndex reference, AnnotatorIndex candidate) const;

 private:
  struct PairFrames {
    AnnotatorIndex comparator;
    AnnotatorIndex reference;
    std::vector<FrameIndex> frames;
  };

  std::size_t slot(FrameIndex frame, AnnotatorIndex reference, AnnotatorIndex candidate) const;
  void validate_query(const NestedQuery& q) const;

  const Dataset* dataset_;
  Task task_;
  EvalOptions options_;
  AnnotatorIndex model_;
  std::vector<AnnotatorIndex> panel_;  // sorted by id
  std::vector<FrameIndex> frames_;
  std::vector<PairFrames> pairs_;      // (comparator, reference) in panel order
  std::vector<std::optional<ConfusionMatrix>> confusions_;
};

/// Nested evaluation of one (metric, class) over every frame of `task`.
/// Throws UndefinedStatisticError when every comparator weight is zero.
NestedResult evaluate_nested(const Dataset& d, Task task, Metric metric, ClassId class_id,
                             const EvalOptions& options = {});

}  // namespace pf
