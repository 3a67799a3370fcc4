#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace pf {

using ClassId = std::int32_t;
using FrameIndex = std::size_t;
using AnnotatorIndex = std::size_t;

inline constexpr ClassId kBackground = 0;
inline constexpr std::string_view kBackgroundName = "background";

enum class Task { tissue, cell_class, cell_count };

std::string_view to_string(Task task);
/// Throws ArgumentError for unknown names.
Task parse_task(std::string_view name);

/// Ordered class names indexed by class id. Id 0 is always "background" and
/// ids are contiguous, so the registry is just the list of names.
class ClassRegistry {
 public:
  /// Registry holding only the background class.
  ClassRegistry();
  /// `names` are the nonzero classes in id order (ids 1..C).
  explicit ClassRegistry(const std::vector<std::string>& names);

  /// Number of entries including background (C + 1).
  std::size_t size() const { return names_.size(); }
  /// Number of nonzero classes (C).
  std::size_t nonzero_count() const { return names_.size() - 1; }

  bool contains(ClassId id) const {
    return id >= 0 && static_cast<std::size_t>(id) < names_.size();
  }
  const std::string& name(ClassId id) const;
  std::optional<ClassId> find(std::string_view name) const;
  const std::vector<std::string>& names() const { return names_; }

  bool operator==(const ClassRegistry&) const = default;

 private:
  std::vector<std::string> names_;
};

struct Annotator {
  std::string id;
  bool is_model = false;

  bool operator==(const Annotator&) const = default;
};

struct Frame {
  std::string id;
  std::string slide_id;
  int width_px = 0;
  int height_px = 0;
  double microns_per_pixel = 1.0;
  Task task = Task::tissue;

  double area_px() const { return static_cast<double>(width_px) * height_px; }
  bool operator==(const Frame&) const = default;
};

/// Row-major per-pixel class assignment for one frame.
struct LabelGrid {
  std::string frame_id;
  std::string annotator_id;
  int width = 0;
  int height = 0;
  std::vector<ClassId> labels;

  ClassId at(int row, int col) const {
    return labels[static_cast<std::size_t>(row) * width + col];
  }
  bool operator==(const LabelGrid&) const = default;
};

struct CellPoint {
  double x = 0.0;
  double y = 0.0;
  ClassId class_id = 1;

  bool operator==(const CellPoint&) const = default;
};

struct CellPointSet {
  std::string frame_id;
  std::string annotator_id;
  std::vector<CellPoint> points;

  std::size_t size() const { return points.size(); }
  bool operator==(const CellPointSet&) const = default;
};

/// Per-class cell counts, indexed by class id. Entry 0 is unused and classes
/// past the end of the vector count as zero.
struct CountVector {
  std::string frame_id;
  std::string annotator_id;
  std::vector<std::int64_t> counts;

  std::int64_t count(ClassId id) const {
    return id >= 0 && static_cast<std::size_t>(id) < counts.size() ? counts[id] : 0;
  }
  bool operator==(const CountVector&) const = default;
};

using Annotation = std::variant<LabelGrid, CellPointSet, CountVector>;

/// Slides, frames and per-(frame, annotator) annotations for one evaluation.
///
/// A Dataset is filled once (by the manifest loader, the simulator, or a
/// test) and then only read; all evaluation entry points take it by const
/// reference and may share it across threads.
class Dataset {
 public:
  ClassRegistry classes;
  std::vector<Annotator> annotators;
  std::vector<std::string> slides;
  std::vector<Frame> frames;

  AnnotatorIndex add_annotator(std::string id, bool is_model = false);
  void add_slide(std::string id);
  FrameIndex add_frame(Frame frame);
  /// Stores an annotation, replacing any previous one for the pair.
  void set_annotation(FrameIndex frame, AnnotatorIndex annotator, Annotation annotation);

  const Annotation* annotation(FrameIndex frame, AnnotatorIndex annotator) const;
  bool has_annotation(FrameIndex frame, AnnotatorIndex annotator) const {
    return annotation(frame, annotator) != nullptr;
  }

  std::optional<AnnotatorIndex> find_annotator(std::string_view id) const;
  std::optional<FrameIndex> find_frame(std::string_view id) const;
  /// Throws ArgumentError for an unknown id.
  AnnotatorIndex annotator_index(std::string_view id) const;

  /// Index of the (first) annotator flagged as the model.
  std::optional<AnnotatorIndex> model() const;
  /// Every annotator not flagged as the model, in registry order.
  std::vector<AnnotatorIndex> pathologists() const;
  /// Frames of the given task, in dataset order.
  std::vector<FrameIndex> frames_of(Task task) const;
  /// Number of pathologists that annotated a frame.
  std::size_t pathologist_count(FrameIndex frame) const;

  /// Removes a frame and its annotations. Later frame indices shift down.
  void remove_frame(FrameIndex frame);

  bool operator==(const Dataset&) const = default;

 private:
  std::size_t slot(FrameIndex frame, AnnotatorIndex annotator) const {
    return frame * annotators.size() + annotator;
  }
  void resize_storage(std::size_t old_annotator_count);

  std::vector<std::optional<Annotation>> annotations_;
};

struct Violation {
  std::string frame_id;
  std::string annotator_id;
  std::string rule;

  bool operator==(const Violation&) const = default;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool empty() const { return violations.empty(); }
  std::size_t size() const { return violations.size(); }
};

/// Checks every dataset invariant and reports each violation. Never throws.
ValidationReport validate_dataset(const Dataset& dataset);

/// Zero-fills count vectors so each covers every registered class.
void normalize_counts(Dataset& dataset);

/// Drops frames annotated by fewer than two pathologists. Returns one warning
/// per dropped frame.
std::vector<std::string> exclude_underannotated_frames(Dataset& dataset);

struct ManifestLoad {
  Dataset dataset;
  /// One entry per frame dropped for having fewer than two pathologists.
  std::vector<std::string> warnings;
  /// Invariant violations found in the declared dataset.
  ValidationReport report;
};

/// Loads a JSON manifest and its annotation files, reporting invariant
/// violations instead of failing on them. Still throws InputError for
/// unreadable or malformed files, dimension mismatches and unknown classes.
ManifestLoad load_manifest(const std::filesystem::path& path);

/// Loads a JSON manifest and the annotation files it references (paths are
/// relative to the manifest's directory). The returned dataset is normalized
/// and frames with fewer than two pathologists are dropped; a warning is
/// appended to `warnings` for each. Throws InputError on any hard failure.
Dataset parse_manifest(const std::filesystem::path& path,
                       std::vector<std::string>* warnings = nullptr);

/// Writes `manifest.json` plus one annotation file per (frame, annotator)
/// under `dir/annotations/`, in the formats parse_manifest reads. Real values
/// are written in shortest round-trip form so re-parsing is lossless.
void write_dataset(const Dataset& dataset, const std::filesystem::path& dir);

}  // namespace pf
