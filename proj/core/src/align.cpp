#include "pairframes/align.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "pairframes/error.hpp"

namespace pf {
namespace {

void require_same_frame(const CellPointSet& a, const CellPointSet& b) {
  if (a.frame_id != b.frame_id) {
    throw ArgumentError(fmt::format("point sets belong to different frames ('{}' vs '{}')",
                                    a.frame_id, b.frame_id));
  }
}

double distance(const CellPoint& p, const CellPoint& q) {
  const double dx = p.x - q.x;
  const double dy = p.y - q.y;
  return std::sqrt(dx * dx + dy * dy);
}

}  // namespace

std::vector<CrossDistance> pairwise_distances(const CellPointSet& a, const CellPointSet& b) {
  require_same_frame(a, b);
  std::vector<CrossDistance> out;
  out.reserve(a.size() * b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      out.push_back({i, j, distance(a.points[i], b.points[j])});
    }
  }
  return out;
}

MatchedPairs greedy_match(const CellPointSet& a, const CellPointSet& b, double threshold_px) {
  require_same_frame(a, b);
  if (!(threshold_px > 0.0)) {
    throw ArgumentError(fmt::format("match threshold must be positive, got {}", threshold_px));
  }

  // Sort every admissible cross pair once; consumed points invalidate later
  // candidates lazily during the sweep.
  std::vector<CrossDistance> candidates;
  candidates.reserve(a.size() * b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      const double d = distance(a.points[i], b.points[j]);
      if (d <= threshold_px) candidates.push_back({i, j, d});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const CrossDistance& l, const CrossDistance& r) {
    if (l.distance != r.distance) return l.distance < r.distance;
    if (l.index_a != r.index_a) return l.index_a < r.index_a;
    return l.index_b < r.index_b;
  });

  std::vector<char> used_a(a.size(), 0);
  std::vector<char> used_b(b.size(), 0);
  MatchedPairs result;
  const auto max_pairs = std::min(a.size(), b.size());
  for (const auto& c : candidates) {
    if (result.pairs.size() == max_pairs) break;
    if (used_a[c.index_a] || used_b[c.index_b]) continue;
    used_a[c.index_a] = used_b[c.index_b] = 1;
    result.pairs.push_back(c);
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!used_a[i]) result.singletons_a.push_back(i);
  }
  for (std::size_t j = 0; j < b.size(); ++j) {
    if (!used_b[j]) result.singletons_b.push_back(j);
  }
  return result;
}

double threshold_in_pixels(const MatchThreshold& threshold, const Frame& frame) {
  if (threshold.unit == ThresholdUnit::px) return threshold.value;
  if (!(frame.microns_per_pixel > 0.0)) {
    throw ArgumentError(fmt::format("frame '{}' has nonpositive microns_per_pixel", frame.id));
  }
  return threshold.value / frame.microns_per_pixel;
}

MatchedPairs greedy_match(const CellPointSet& a, const CellPointSet& b,
                          const MatchThreshold& threshold, const Frame& frame) {
  return greedy_match(a, b, threshold_in_pixels(threshold, frame));
}

}  // namespace pf
