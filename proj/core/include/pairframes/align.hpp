#pragma once

#include <cstddef>
#include <vector>

#include "pairframes/dataset.hpp"

namespace pf {

struct CrossDistance {
  std::size_t index_a = 0;
  std::size_t index_b = 0;
  double distance = 0.0;

  bool operator==(const CrossDistance&) const = default;
};

/// Greedy alignment of two point sets: matched index pairs in emission order
/// (non-decreasing distance) plus the unmatched points of each side.
struct MatchedPairs {
  std::vector<CrossDistance> pairs;
  std::vector<std::size_t> singletons_a;
  std::vector<std::size_t> singletons_b;

  bool operator==(const MatchedPairs&) const = default;
};

enum class ThresholdUnit { px, micron };

struct MatchThreshold {
  double value = 7.5;
  ThresholdUnit unit = ThresholdUnit::micron;
};

/// Euclidean pixel distance between every point of `a` and every point of
/// `b`, ordered by index_a then index_b. Throws ArgumentError when the sets
/// belong to different frames.
std::vector<CrossDistance> pairwise_distances(const CellPointSet& a, const CellPointSet& b);

/// Iterative nearest-pair clustering: repeatedly pairs the closest remaining
/// (a, b) points whose distance is within `threshold_px`, removing both.
/// Equal distances resolve to the smaller index_a, then the smaller index_b.
/// Class labels are ignored. Singletons are listed in ascending index order.
MatchedPairs greedy_match(const CellPointSet& a, const CellPointSet& b, double threshold_px);

/// As above with the threshold given in `threshold.unit`; microns are
/// converted with the frame's microns_per_pixel.
MatchedPairs greedy_match(const CellPointSet& a, const CellPointSet& b,
                          const MatchThreshold& threshold, const Frame& frame);

double threshold_in_pixels(const MatchThreshold& threshold, const Frame& frame);

}  // namespace pf
