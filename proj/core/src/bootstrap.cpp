#include "pairframes/bootstrap.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include <fmt/format.h>

#include "pairframes/error.hpp"
#include "pairframes/rng.hpp"

namespace pf {

std::string_view to_string(ResampleStrategy strategy) {
  switch (strategy) {
    case ResampleStrategy::hierarchical: return "hierarchical";
    case ResampleStrategy::frames_only: return "frames";
    case ResampleStrategy::slides_only: return "slides";
  }
  return "unknown";
}

ResampleStrategy parse_resample_strategy(std::string_view name) {
  if (name == "hierarchical") return ResampleStrategy::hierarchical;
  if (name == "frames") return ResampleStrategy::frames_only;
  if (name == "slides") return ResampleStrategy::slides_only;
  throw ArgumentError(fmt::format("unknown resampling strategy '{}'", name));
}

void validate(const ResampleSpec& spec) {
  if (spec.replicates < 1) throw ArgumentError("bootstrap needs at least one replicate");
  if (!(spec.alpha > 0.0 && spec.alpha < 1.0)) {
    throw ArgumentError(fmt::format("alpha must lie in (0, 1), got {}", spec.alpha));
  }
}

// ---------------------------------------------------------------------------
// Resampling

FrameScope::FrameScope(const Dataset& d, std::span<const FrameIndex> frames)
    : dataset_frame_count_(d.frames.size()) {
  std::vector<char> in_scope(d.frames.size(), 0);
  for (auto f : frames) {
    if (f >= d.frames.size()) throw ArgumentError("frame scope: frame index out of range");
    in_scope[f] = 1;
  }
  for (const auto& slide : d.slides) {
    std::vector<FrameIndex> members;
    for (FrameIndex f = 0; f < d.frames.size(); ++f) {
      if (in_scope[f] && d.frames[f].slide_id == slide) members.push_back(f);
    }
    if (!members.empty()) {
      frames_.insert(frames_.end(), members.begin(), members.end());
      slides_.push_back(std::move(members));
    }
  }
  if (frames_.size() != static_cast<std::size_t>(std::count(in_scope.begin(), in_scope.end(), 1))) {
    throw ArgumentError("frame scope: some frames reference undeclared slides");
  }
}

FrameScope::FrameScope(const Dataset& d) {
  std::vector<FrameIndex> all(d.frames.size());
  for (FrameIndex f = 0; f < all.size(); ++f) all[f] = f;
  *this = FrameScope(d, all);
}

FrameMultiset FrameScope::identity() const {
  FrameMultiset m(dataset_frame_count_, 0);
  for (auto f : frames_) m[f] = 1;
  return m;
}

FrameMultiset hierarchical_resample(const FrameScope& scope, std::uint64_t seed) {
  FrameMultiset m(scope.dataset_frame_count(), 0);
  const auto& slides = scope.slides();
  if (slides.empty()) return m;
  Rng rng(seed);
  for (std::size_t s = 0; s < slides.size(); ++s) {
    const auto& members = slides[rng.uniform_index(slides.size())];
    for (std::size_t k = 0; k < members.size(); ++k) ++m[members[rng.uniform_index(members.size())]];
  }
  return m;
}

FrameMultiset hierarchical_resample(const Dataset& d, std::uint64_t seed) {
  return hierarchical_resample(FrameScope(d), seed);
}

FrameMultiset resample(const FrameScope& scope, ResampleStrategy strategy, std::uint64_t seed) {
  switch (strategy) {
    case ResampleStrategy::hierarchical: return hierarchical_resample(scope, seed);
    case ResampleStrategy::frames_only: {
      FrameMultiset m(scope.dataset_frame_count(), 0);
      const auto& frames = scope.frames();
      if (frames.empty()) return m;
      Rng rng(seed);
      for (std::size_t k = 0; k < frames.size(); ++k) ++m[frames[rng.uniform_index(frames.size())]];
      return m;
    }
    case ResampleStrategy::slides_only: {
      FrameMultiset m(scope.dataset_frame_count(), 0);
      const auto& slides = scope.slides();
      if (slides.empty()) return m;
      Rng rng(seed);
      for (std::size_t s = 0; s < slides.size(); ++s) {
        for (auto f : slides[rng.uniform_index(slides.size())]) ++m[f];
      }
      return m;
    }
  }
  throw ArgumentError("unknown resampling strategy");
}

// ---------------------------------------------------------------------------
// Intervals

namespace {

// ceil(p * n) for a rank, ignoring rounding residue so that e.g.
// 0.025 * 1000 gives rank 25 rather than 26.
std::size_t nearest_rank(double p, std::size_t n) {
  const double x = p * static_cast<double>(n);
  const double rounded = std::round(x);
  const double rank = std::abs(x - rounded) <= 1e-9 * std::max(1.0, x) ? rounded : std::ceil(x);
  return std::clamp<std::size_t>(static_cast<std::size_t>(rank), 1, n);
}

}  // namespace

std::pair<double, double> percentile_interval(std::vector<double> values, double alpha) {
  if (values.empty()) throw ArgumentError("percentile interval of an empty sample");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("alpha must lie in (0, 1)");
  std::sort(values.begin(), values.end());
  const auto n = values.size();
  return {values[nearest_rank(alpha / 2.0, n) - 1], values[nearest_rank(1.0 - alpha / 2.0, n) - 1]};
}

// ---------------------------------------------------------------------------
// Bootstrap driver

std::vector<BootstrapResult> bootstrap_statistics(const FrameScope& scope, const VectorStatistic& stat,
                                                  std::size_t outputs, const ResampleSpec& spec,
                                                  unsigned threads) {
  validate(spec);
  const auto check = [&](std::vector<std::optional<double>> v) {
    if (v.size() != outputs) {
      throw ArgumentError(fmt::format("statistic returned {} values, expected {}", v.size(), outputs));
    }
    return v;
  };

  const auto point = check(stat(scope.identity()));
  std::vector<std::vector<std::optional<double>>> replicates(spec.replicates);

  const auto run = [&](std::size_t i) {
    const auto sample = resample(scope, spec.strategy, child_seed(spec.master_seed, i));
    replicates[i] = check(stat(sample));
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(spec.replicates)));
  if (workers == 1) {
    for (std::size_t i = 0; i < spec.replicates; ++i) run(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < spec.replicates; i = next++) {
          try {
            run(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            next = spec.replicates;
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  std::vector<BootstrapResult> results(outputs);
  for (std::size_t k = 0; k < outputs; ++k) {
    auto& r = results[k];
    r.spec = spec;
    r.point_estimate = point[k];
    r.replicate_values.reserve(spec.replicates);
    std::vector<double> defined;
    defined.reserve(spec.replicates);
    for (const auto& rep : replicates) {
      r.replicate_values.push_back(rep[k]);
      if (rep[k]) {
        defined.push_back(*rep[k]);
      } else {
        ++r.undefined_replicate_count;
      }
    }
    if (!defined.empty()) {
      const auto [lo, hi] = percentile_interval(std::move(defined), spec.alpha);
      r.ci_low = lo;
      r.ci_high = hi;
    }
  }
  return results;
}

BootstrapResult bootstrap_statistic(const FrameScope& scope, const ScalarStatistic& stat,
                                    const ResampleSpec& spec, unsigned threads) {
  auto results = bootstrap_statistics(
      scope, [&](std::span<const std::uint32_t> m) { return std::vector<std::optional<double>>{stat(m)}; }, 1,
      spec, threads);
  if (!results.front().ci_low) {
    throw UndefinedStatisticError("every bootstrap replicate is undefined");
  }
  return std::move(results.front());
}

// ---------------------------------------------------------------------------
// Margin tests

std::string_view to_string(TestMode mode) {
  switch (mode) {
    case TestMode::non_inferiority: return "noninferiority";
    case TestMode::equivalence: return "equivalence";
    case TestMode::superiority: return "superiority";
  }
  return "unknown";
}

TestMode parse_test_mode(std::string_view name) {
  if (name == "noninferiority") return TestMode::non_inferiority;
  if (name == "equivalence") return TestMode::equivalence;
  if (name == "superiority") return TestMode::superiority;
  throw ArgumentError(fmt::format("unknown test mode '{}'", name));
}

std::string_view to_string(Conclusion conclusion) {
  switch (conclusion) {
    case Conclusion::non_inferior: return "non_inferior";
    case Conclusion::equivalent: return "equivalent";
    case Conclusion::superior: return "superior";
    case Conclusion::inconclusive: return "inconclusive";
  }
  return "unknown";
}

TestOutcome hypothesis_test(const BootstrapResult& result, double margin, TestMode mode) {
  if (!(margin > 0.0)) throw ArgumentError(fmt::format("margin must be positive, got {}", margin));
  TestOutcome outcome{mode, margin, Conclusion::inconclusive};
  if (!result.ci_low || !result.ci_high) return outcome;
  const double lo = *result.ci_low;
  const double hi = *result.ci_high;
  switch (mode) {
    case TestMode::non_inferiority:
      if (lo > -margin) outcome.conclusion = Conclusion::non_inferior;
      break;
    case TestMode::equivalence:
      if (-margin < lo && hi < margin) outcome.conclusion = Conclusion::equivalent;
      break;
    case TestMode::superiority:
      if (lo > 0.0) outcome.conclusion = Conclusion::superior;
      break;
  }
  return outcome;
}

}  // namespace pf
