#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "pairframes/align.hpp"
#include "pairframes/dataset.hpp"

namespace pf {

/// Square count table over class ids (0 = background). Rows hold the
/// reference (ground-truth) annotator's classes, columns the candidate's.
class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  ConfusionMatrix(std::size_t dim, std::string row_annotator, std::string col_annotator,
                  std::int64_t frame_count = 0);

  std::size_t dim() const { return dim_; }
  const std::string& row_annotator() const { return row_annotator_; }
  const std::string& col_annotator() const { return col_annotator_; }
  std::int64_t frame_count() const { return frame_count_; }
  void set_frame_count(std::int64_t n) { frame_count_ = n; }

  std::int64_t at(ClassId ref, ClassId cand) const { return counts_[index(ref, cand)]; }
  std::int64_t& at(ClassId ref, ClassId cand) { return counts_[index(ref, cand)]; }

  std::int64_t row_sum(ClassId ref) const;
  std::int64_t col_sum(ClassId cand) const;
  std::int64_t total() const;

  /// Adds `multiplicity` copies of `other` (counts and frame count). Throws
  /// ArgumentError unless both matrices share dims and annotator pair.
  void add(const ConfusionMatrix& other, std::int64_t multiplicity = 1);

  /// Swaps the roles of the two annotators.
  ConfusionMatrix transposed() const;

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  std::size_t index(ClassId ref, ClassId cand) const {
    return static_cast<std::size_t>(ref) * dim_ + static_cast<std::size_t>(cand);
  }

  std::size_t dim_ = 0;
  std::string row_annotator_;
  std::string col_annotator_;
  std::int64_t frame_count_ = 0;
  std::vector<std::int64_t> counts_;
};

/// Per-pixel tally of (reference class, candidate class) over one frame.
ConfusionMatrix pixel_confusion(const LabelGrid& ref, const LabelGrid& cand,
                                const ClassRegistry& classes);

/// Tally of aligned cells: matched pairs count (class_a, class_b), singletons
/// of `a` count (class_a, background) and singletons of `b` count
/// (background, class_b). `a` is the reference side.
ConfusionMatrix object_confusion(const MatchedPairs& matches, const CellPointSet& a,
                                 const CellPointSet& b, const ClassRegistry& classes);

/// Element-wise sum; the frame count is summed too.
ConfusionMatrix aggregate_confusions(std::span<const ConfusionMatrix> matrices);

/// CSV with class names on both axes: header `reference\candidate,<names>`.
std::string confusion_csv(const ConfusionMatrix& m, const ClassRegistry& classes);

}  // namespace pf
