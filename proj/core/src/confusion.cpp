#include "pairframes/confusion.hpp"

#include <numeric>

#include <fmt/format.h>

#include "csv.hpp"
#include "pairframes/error.hpp"

namespace pf {

ConfusionMatrix::ConfusionMatrix(std::size_t dim, std::string row_annotator,
                                 std::string col_annotator, std::int64_t frame_count)
    : dim_(dim),
      row_annotator_(std::move(row_annotator)),
      col_annotator_(std::move(col_annotator)),
      frame_count_(frame_count),
      counts_(dim * dim, 0) {}

std::int64_t ConfusionMatrix::row_sum(ClassId ref) const {
  std::int64_t s = 0;
  for (std::size_t j = 0; j < dim_; ++j) s += counts_[index(ref, static_cast<ClassId>(j))];
  return s;
}

std::int64_t ConfusionMatrix::col_sum(ClassId cand) const {
  std::int64_t s = 0;
  for (std::size_t i = 0; i < dim_; ++i) s += counts_[index(static_cast<ClassId>(i), cand)];
  return s;
}

std::int64_t ConfusionMatrix::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::int64_t{0});
}

void ConfusionMatrix::add(const ConfusionMatrix& other, std::int64_t multiplicity) {
  if (other.dim_ != dim_ || other.row_annotator_ != row_annotator_ ||
      other.col_annotator_ != col_annotator_) {
    throw ArgumentError(fmt::format(
        "cannot aggregate confusion matrices of different pairs or dims ({}x{} {}->{} vs {}x{} {}->{})",
        dim_, dim_, row_annotator_, col_annotator_, other.dim_, other.dim_, other.row_annotator_,
        other.col_annotator_));
  }
  for (std::size_t k = 0; k < counts_.size(); ++k) counts_[k] += multiplicity * other.counts_[k];
  frame_count_ += multiplicity * other.frame_count_;
}

ConfusionMatrix ConfusionMatrix::transposed() const {
  ConfusionMatrix t(dim_, col_annotator_, row_annotator_, frame_count_);
  for (std::size_t i = 0; i < dim_; ++i) {
    for (std::size_t j = 0; j < dim_; ++j) {
      t.counts_[j * dim_ + i] = counts_[i * dim_ + j];
    }
  }
  return t;
}

ConfusionMatrix pixel_confusion(const LabelGrid& ref, const LabelGrid& cand,
                                const ClassRegistry& classes) {
  if (ref.frame_id != cand.frame_id) {
    throw ArgumentError(fmt::format("label grids belong to different frames ('{}' vs '{}')",
                                    ref.frame_id, cand.frame_id));
  }
  if (ref.width != cand.width || ref.height != cand.height || ref.labels.size() != cand.labels.size()) {
    throw ArgumentError(fmt::format("label grid dimension mismatch in frame '{}'", ref.frame_id));
  }
  ConfusionMatrix m(classes.size(), ref.annotator_id, cand.annotator_id, 1);
  for (std::size_t k = 0; k < ref.labels.size(); ++k) {
    const ClassId r = ref.labels[k];
    const ClassId c = cand.labels[k];
    if (!classes.contains(r) || !classes.contains(c)) {
      throw ArgumentError(fmt::format("unregistered class in label grid of frame '{}'", ref.frame_id));
    }
    ++m.at(r, c);
  }
  return m;
}

ConfusionMatrix object_confusion(const MatchedPairs& matches, const CellPointSet& a,
                                 const CellPointSet& b, const ClassRegistry& classes) {
  ConfusionMatrix m(classes.size(), a.annotator_id, b.annotator_id, 1);
  const auto class_of = [&](const CellPointSet& s, std::size_t i) {
    if (i >= s.size()) {
      throw ArgumentError(fmt::format("match index {} out of range for point set of {} ('{}')", i,
                                      s.size(), s.annotator_id));
    }
    const ClassId c = s.points[i].class_id;
    if (!classes.contains(c)) throw ArgumentError(fmt::format("unregistered class {} in point set", c));
    return c;
  };
  for (const auto& p : matches.pairs) ++m.at(class_of(a, p.index_a), class_of(b, p.index_b));
  for (auto i : matches.singletons_a) ++m.at(class_of(a, i), kBackground);
  for (auto j : matches.singletons_b) ++m.at(kBackground, class_of(b, j));
  return m;
}

ConfusionMatrix aggregate_confusions(std::span<const ConfusionMatrix> matrices) {
  if (matrices.empty()) throw ArgumentError("cannot aggregate an empty list of confusion matrices");
  const auto& first = matrices.front();
  ConfusionMatrix sum(first.dim(), first.row_annotator(), first.col_annotator(), 0);
  for (const auto& m : matrices) sum.add(m);
  return sum;
}

std::string confusion_csv(const ConfusionMatrix& m, const ClassRegistry& classes) {
  if (m.dim() != classes.size()) throw ArgumentError("confusion matrix does not match class registry");
  csv::Row header{"reference\\candidate"};
  for (const auto& name : classes.names()) header.push_back(name);
  std::string out = csv::join(header) + "\n";
  for (std::size_t i = 0; i < m.dim(); ++i) {
    csv::Row row{classes.names()[i]};
    for (std::size_t j = 0; j < m.dim(); ++j) {
      row.push_back(std::to_string(m.at(static_cast<ClassId>(i), static_cast<ClassId>(j))));
    }
    out += csv::join(row) + "\n";
  }
  return out;
}

}  // namespace pf
