#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "pairframes/dataset.hpp"

namespace pf {

enum class ResampleStrategy { hierarchical, frames_only, slides_only };

std::string_view to_string(ResampleStrategy strategy);
/// Accepts "hierarchical", "frames" and "slides".
ResampleStrategy parse_resample_strategy(std::string_view name);

struct ResampleSpec {
  ResampleStrategy strategy = ResampleStrategy::hierarchical;
  std::size_t replicates = 1000;
  double alpha = 0.05;
  std::uint64_t master_seed = 0;
};

/// Throws ArgumentError for zero replicates or alpha outside (0, 1).
void validate(const ResampleSpec& spec);

/// Frame multiplicities indexed by dataset frame index.
using FrameMultiset = std::vector<std::uint32_t>;

/// The frames a bootstrap draws from, grouped by slide. Slides keep dataset
/// order and only slides with at least one in-scope frame are kept.
class FrameScope {
 public:
  FrameScope(const Dataset& d, std::span<const FrameIndex> frames);
  /// Every frame of the dataset.
  explicit FrameScope(const Dataset& d);

  std::size_t dataset_frame_count() const { return dataset_frame_count_; }
  const std::vector<FrameIndex>& frames() const { return frames_; }
  const std::vector<std::vector<FrameIndex>>& slides() const { return slides_; }

  /// Multiplicity 1 on every in-scope frame.
  FrameMultiset identity() const;

 private:
  std::size_t dataset_frame_count_ = 0;
  std::vector<FrameIndex> frames_;
  std::vector<std::vector<FrameIndex>> slides_;
};

/// Draws, for each of the S in-scope slides in turn, a slide uniformly with
/// replacement and then as many of that slide's frames (uniformly, with
/// replacement) as it holds. Deterministic given the seed.
FrameMultiset hierarchical_resample(const FrameScope& scope, std::uint64_t seed);
FrameMultiset hierarchical_resample(const Dataset& d, std::uint64_t seed);

/// Dispatches on strategy. frames_only draws F frames from the pooled
/// in-scope frames; slides_only draws S slides and keeps all their frames.
FrameMultiset resample(const FrameScope& scope, ResampleStrategy strategy, std::uint64_t seed);

/// Nearest-rank percentile interval: the ceil(n*alpha/2)-th and
/// ceil(n*(1-alpha/2))-th order statistics (1-based, clamped to [1, n]).
std::pair<double, double> percentile_interval(std::vector<double> values, double alpha);

struct BootstrapResult {
  std::optional<double> point_estimate;
  /// One entry per replicate, in replicate order; undefined entries are kept.
  std::vector<std::optional<double>> replicate_values;
  std::optional<double> ci_low;
  std::optional<double> ci_high;
  ResampleSpec spec;
  std::size_t undefined_replicate_count = 0;

  bool operator==(const BootstrapResult& o) const {
    return point_estimate == o.point_estimate && replicate_values == o.replicate_values &&
           ci_low == o.ci_low && ci_high == o.ci_high && undefined_replicate_count == o.undefined_replicate_count &&
           spec.strategy == o.spec.strategy && spec.replicates == o.spec.replicates &&
           spec.alpha == o.spec.alpha && spec.master_seed == o.spec.master_seed;
  }
};

/// A statistic evaluated on a resampled frame multiset. Must be a pure
/// function of its argument.
using ScalarStatistic = std::function<std::optional<double>(std::span<const std::uint32_t>)>;
/// Several statistics computed together from one multiset.
using VectorStatistic = std::function<std::vector<std::optional<double>>(std::span<const std::uint32_t>)>;

/// Bootstraps `outputs` statistics at once. Replicate i resamples with
/// child_seed(master_seed, i); the point estimate uses the identity
/// multiset. Results do not depend on `threads`. Outputs whose replicates
/// are all undefined come back without a CI rather than throwing.
std::vector<BootstrapResult> bootstrap_statistics(const FrameScope& scope, const VectorStatistic& stat,
                                                  std::size_t outputs, const ResampleSpec& spec,
                                                  unsigned threads = 1);

/// Single-statistic form. Throws UndefinedStatisticError when every
/// replicate is undefined.
BootstrapResult bootstrap_statistic(const FrameScope& scope, const ScalarStatistic& stat,
                                    const ResampleSpec& spec, unsigned threads = 1);

enum class TestMode { non_inferiority, equivalence, superiority };
enum class Conclusion { non_inferior, equivalent, superior, inconclusive };

std::string_view to_string(TestMode mode);
/// Accepts "noninferiority", "equivalence" and "superiority".
TestMode parse_test_mode(std::string_view name);
std::string_view to_string(Conclusion conclusion);

/// Positive differences mean the model performs better.
struct TestOutcome {
  TestMode mode = TestMode::non_inferiority;
  double margin = 0.0;
  Conclusion conclusion = Conclusion::inconclusive;
};

/// non_inferiority: ci_low > -margin. equivalence: -margin < ci_low and
/// ci_high < margin. superiority: ci_low > 0. Anything else, including a
/// missing CI, is inconclusive. Throws ArgumentError for margin <= 0.
TestOutcome hypothesis_test(const BootstrapResult& result, double margin, TestMode mode);

}  // namespace pf
