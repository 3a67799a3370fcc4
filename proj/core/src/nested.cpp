#include "pairframes/nested.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "pairframes/error.hpp"

namespace pf {

std::string_view to_string(UndefinedPolicy policy) {
  switch (policy) {
    case UndefinedPolicy::exclude: return "exclude";
    case UndefinedPolicy::as_zero: return "zero";
    case UndefinedPolicy::as_one: return "one";
  }
  return "unknown";
}

UndefinedPolicy parse_undefined_policy(std::string_view name) {
  if (name == "exclude") return UndefinedPolicy::exclude;
  if (name == "zero") return UndefinedPolicy::as_zero;
  if (name == "one") return UndefinedPolicy::as_one;
  throw ArgumentError(fmt::format("unknown undefined-metric policy '{}'", name));
}

std::vector<FrameIndex> common_frames(const Dataset& d, std::string_view x, std::string_view y) {
  const auto a = d.annotator_index(x);
  const auto b = d.annotator_index(y);
  std::vector<FrameIndex> out;
  for (FrameIndex f = 0; f < d.frames.size(); ++f) {
    if (d.has_annotation(f, a) && d.has_annotation(f, b)) out.push_back(f);
  }
  return out;
}

std::vector<FrameIndex> common_frames(const Dataset& d, AnnotatorIndex x, AnnotatorIndex y, Task task) {
  if (x >= d.annotators.size() || y >= d.annotators.size()) {
    throw ArgumentError("common_frames: annotator index out of range");
  }
  std::vector<FrameIndex> out;
  for (FrameIndex f = 0; f < d.frames.size(); ++f) {
    if (d.frames[f].task == task && d.has_annotation(f, x) && d.has_annotation(f, y)) out.push_back(f);
  }
  return out;
}

namespace {

void require_applicable(Metric metric, Task task) {
  if (!metric_applies(metric, task)) {
    throw ArgumentError(fmt::format("metric '{}' does not apply to {} frames", to_string(metric),
                                    to_string(task)));
  }
}

ConfusionMatrix single_frame_confusion(const Dataset& d, FrameIndex f, AnnotatorIndex ref,
                                       AnnotatorIndex cand, const EvalOptions& options) {
  const auto& frame = d.frames[f];
  const auto* r = d.annotation(f, ref);
  const auto* c = d.annotation(f, cand);
  if (!r || !c) {
    throw ArgumentError(fmt::format("frame '{}' is not annotated by both '{}' and '{}'", frame.id,
                                    d.annotators[ref].id, d.annotators[cand].id));
  }
  if (frame.task == Task::tissue) {
    return pixel_confusion(std::get<LabelGrid>(*r), std::get<LabelGrid>(*c), d.classes);
  }
  const auto& a = std::get<CellPointSet>(*r);
  const auto& b = std::get<CellPointSet>(*c);
  return object_confusion(greedy_match(a, b, options.match_threshold, frame), a, b, d.classes);
}

const CountVector& counts_of(const Dataset& d, FrameIndex f, AnnotatorIndex a) {
  const auto* annotation = d.annotation(f, a);
  if (!annotation) {
    throw ArgumentError(fmt::format("frame '{}' is not annotated by '{}'", d.frames[f].id, d.annotators[a].id));
  }
  return std::get<CountVector>(*annotation);
}

}  // namespace

PairwiseScore pairwise_score(const Dataset& d, std::string_view reference, std::string_view candidate,
                             std::span<const FrameIndex> frames, Metric metric, ClassId class_id,
                             const EvalOptions& options) {
  const auto ref = d.annotator_index(reference);
  const auto cand = d.annotator_index(candidate);
  if (!d.classes.contains(class_id)) throw ArgumentError(fmt::format("unregistered class {}", class_id));
  PairwiseScore score{std::string(reference), std::string(candidate), class_id, metric, std::nullopt, 0.0};
  if (frames.empty()) return score;

  for (auto f : frames) {
    if (f >= d.frames.size()) throw ArgumentError("pairwise_score: frame index out of range");
  }
  const Task task = d.frames[frames.front()].task;
  for (auto f : frames) {
    if (d.frames[f].task != task) throw ArgumentError("pairwise_score: frames mix tasks");
  }
  require_applicable(metric, task);

  if (task == Task::cell_count) {
    PairedCounts table{class_id, {}};
    for (auto f : frames) {
      table.rows.push_back({counts_of(d, f, ref).count(class_id), counts_of(d, f, cand).count(class_id)});
    }
    if (table.rows.size() >= 2) score.value = icc_2_1(table);
  } else {
    ConfusionMatrix sum(d.classes.size(), d.annotators[ref].id, d.annotators[cand].id, 0);
    for (auto f : frames) sum.add(single_frame_confusion(d, f, ref, cand, options));
    score.value = classification_metric(sum, class_id, metric);
  }
  if (score.value) score.weight = static_cast<double>(frames.size());
  return score;
}

// ---------------------------------------------------------------------------
// NestedEvaluator

NestedEvaluator::NestedEvaluator(const Dataset& d, Task task, const EvalOptions& options)
    : dataset_(&d), task_(task), options_(options) {
  const auto model = d.model();
  if (!model) throw ArgumentError("dataset has no model annotator");
  model_ = *model;
  panel_ = d.pathologists();
  if (panel_.size() < 2) {
    throw ArgumentError(fmt::format("nested evaluation needs at least 2 pathologists, found {}", panel_.size()));
  }
  std::sort(panel_.begin(), panel_.end(),
            [&](AnnotatorIndex l, AnnotatorIndex r) { return d.annotators[l].id < d.annotators[r].id; });
  frames_ = d.frames_of(task);

  for (auto p : panel_) {
    for (auto r : panel_) {
      if (p == r) continue;
      pairs_.push_back({p, r, {}});
      for (auto f : frames_) {
        if (d.has_annotation(f, p) && d.has_annotation(f, r)) pairs_.back().frames.push_back(f);
      }
    }
  }

  if (task == Task::cell_count) return;
  const auto n = d.annotators.size();
  confusions_.resize(d.frames.size() * n * n);
  for (auto f : frames_) {
    if (!d.has_annotation(f, model_)) {
      throw ArgumentError(fmt::format("model annotation missing for frame '{}'", d.frames[f].id));
    }
    for (auto r : panel_) {
      if (!d.has_annotation(f, r)) continue;
      for (AnnotatorIndex c = 0; c < n; ++c) {
        if (c == r || !d.has_annotation(f, c)) continue;
        confusions_[slot(f, r, c)] = single_frame_confusion(d, f, r, c, options_);
      }
    }
  }
}

std::size_t NestedEvaluator::slot(FrameIndex frame, AnnotatorIndex reference, AnnotatorIndex candidate) const {
  const auto n = dataset_->annotators.size();
  return (frame * n + reference) * n + candidate;
}

const ConfusionMatrix* NestedEvaluator::frame_confusion(FrameIndex frame, AnnotatorIndex reference,
                                                        AnnotatorIndex candidate) const {
  const auto n = dataset_->annotators.size();
  if (task_ == Task::cell_count || frame >= dataset_->frames.size() || reference >= n || candidate >= n) {
    return nullptr;
  }
  const auto& entry = confusions_[slot(frame, reference, candidate)];
  return entry ? &*entry : nullptr;
}

ConfusionMatrix NestedEvaluator::pair_confusion(AnnotatorIndex reference, AnnotatorIndex candidate) const {
  if (task_ == Task::cell_count) throw ArgumentError("count frames have no confusion matrices");
  const auto& d = *dataset_;
  ConfusionMatrix sum(d.classes.size(), d.annotators.at(reference).id, d.annotators.at(candidate).id, 0);
  for (auto f : frames_) {
    if (const auto* m = frame_confusion(f, reference, candidate)) sum.add(*m);
  }
  return sum;
}

void NestedEvaluator::validate_query(const NestedQuery& q) const {
  require_applicable(q.metric, task_);
  if (!dataset_->classes.contains(q.class_id)) {
    throw ArgumentError(fmt::format("unregistered class {}", q.class_id));
  }
}

namespace {

struct SidePair {
  std::optional<double> model;
  std::optional<double> comparator;
};

std::optional<double> apply_policy(std::optional<double> v, UndefinedPolicy policy) {
  if (v) return v;
  switch (policy) {
    case UndefinedPolicy::exclude: return std::nullopt;
    case UndefinedPolicy::as_zero: return 0.0;
    case UndefinedPolicy::as_one: return 1.0;
  }
  return std::nullopt;
}

}  // namespace

std::vector<NestedResult> NestedEvaluator::evaluate(std::span<const NestedQuery> queries,
                                                    std::span<const std::uint32_t> multiplicity) const {
  const auto& d = *dataset_;
  if (multiplicity.size() != d.frames.size()) {
    throw ArgumentError("multiplicity must have one entry per dataset frame");
  }
  for (const auto& q : queries) validate_query(q);

  // Per (comparator, reference) cell: frame weight and, for classification,
  // the summed confusion of both candidates against the reference.
  std::vector<double> weights(pairs_.size(), 0.0);
  std::vector<ConfusionMatrix> comparator_sum;
  std::vector<ConfusionMatrix> model_sum;
  const bool counts = task_ == Task::cell_count;
  for (std::size_t k = 0; k < pairs_.size(); ++k) {
    const auto& cell = pairs_[k];
    for (auto f : cell.frames) weights[k] += multiplicity[f];
    if (counts) continue;
    comparator_sum.emplace_back(d.classes.size(), d.annotators[cell.reference].id,
                                d.annotators[cell.comparator].id, 0);
    model_sum.emplace_back(d.classes.size(), d.annotators[cell.reference].id, d.annotators[model_].id, 0);
    for (auto f : cell.frames) {
      const auto m = multiplicity[f];
      if (m == 0) continue;
      comparator_sum[k].add(*confusions_[slot(f, cell.reference, cell.comparator)], m);
      model_sum[k].add(*confusions_[slot(f, cell.reference, model_)], m);
    }
  }

  std::vector<NestedResult> results;
  results.reserve(queries.size());
  std::vector<std::array<std::int64_t, 2>> comparator_rows;
  std::vector<std::array<std::int64_t, 2>> model_rows;
  std::vector<std::uint32_t> row_mult;

  for (const auto& q : queries) {
    NestedResult result{task_, q.metric, q.class_id, {}, {}};
    double total_weight = 0.0;
    double total_model = 0.0;
    double total_comparator = 0.0;
    double total_difference = 0.0;

    std::size_t k = 0;
    for (auto p : panel_) {
      ComparatorRow row{d.annotators[p].id, std::nullopt, std::nullopt, std::nullopt, 0.0};
      double w_sum = 0.0;
      double model_acc = 0.0;
      double comparator_acc = 0.0;
      for (; k < pairs_.size() && pairs_[k].comparator == p; ++k) {
        const auto& cell = pairs_[k];
        const double w = weights[k];
        if (w == 0.0) continue;
        SidePair scores;
        if (counts) {
          comparator_rows.clear();
          model_rows.clear();
          row_mult.clear();
          for (auto f : cell.frames) {
            if (multiplicity[f] == 0) continue;
            const auto ref = counts_of(d, f, cell.reference).count(q.class_id);
            comparator_rows.push_back({ref, counts_of(d, f, cell.comparator).count(q.class_id)});
            model_rows.push_back({ref, counts_of(d, f, model_).count(q.class_id)});
            row_mult.push_back(multiplicity[f]);
          }
          scores.comparator = icc_2_1(comparator_rows, row_mult);
          scores.model = icc_2_1(model_rows, row_mult);
        } else {
          scores.comparator = classification_metric(comparator_sum[k], q.class_id, q.metric);
          scores.model = classification_metric(model_sum[k], q.class_id, q.metric);
        }
        scores.comparator = apply_policy(scores.comparator, options_.undefined_policy);
        scores.model = apply_policy(scores.model, options_.undefined_policy);
        if (!scores.comparator || !scores.model) continue;
        w_sum += w;
        model_acc += w * *scores.model;
        comparator_acc += w * *scores.comparator;
      }
      if (w_sum > 0.0) {
        row.model_score = model_acc / w_sum;
        row.comparator_score = comparator_acc / w_sum;
        row.difference = *row.model_score - *row.comparator_score;
        row.weight = w_sum;
        total_weight += w_sum;
        total_model += w_sum * *row.model_score;
        total_comparator += w_sum * *row.comparator_score;
        total_difference += w_sum * *row.difference;
      }
      result.comparators.push_back(std::move(row));
    }
    if (total_weight > 0.0) {
      result.overall.model_mean = total_model / total_weight;
      result.overall.pathologist_mean = total_comparator / total_weight;
      result.overall.mean_difference = total_difference / total_weight;
      result.overall.weight = total_weight;
    }
    results.push_back(std::move(result));
  }
  return results;
}

std::vector<NestedResult> NestedEvaluator::evaluate(std::span<const NestedQuery> queries) const {
  const std::vector<std::uint32_t> ones(dataset_->frames.size(), 1);
  return evaluate(queries, ones);
}

NestedResult evaluate_nested(const Dataset& d, Task task, Metric metric, ClassId class_id,
                             const EvalOptions& options) {
  const NestedEvaluator evaluator(d, task, options);
  const NestedQuery query{metric, class_id};
  auto results = evaluator.evaluate(std::span(&query, 1));
  if (!results.front().overall.defined()) {
    throw UndefinedStatisticError(fmt::format("nested {} for class {} is undefined: every weight is zero",
                                              to_string(metric), class_id));
  }
  return std::move(results.front());
}

}  // namespace pf
