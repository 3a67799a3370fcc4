#include "pairframes/dataset.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

#include <fmt/format.h>

#include "pairframes/error.hpp"

namespace pf {

std::string_view to_string(Task task) {
  switch (task) {
    case Task::tissue: return "tissue";
    case Task::cell_class: return "cell_class";
    case Task::cell_count: return "cell_count";
  }
  return "unknown";
}

Task parse_task(std::string_view name) {
  if (name == "tissue") return Task::tissue;
  if (name == "cell_class") return Task::cell_class;
  if (name == "cell_count") return Task::cell_count;
  throw ArgumentError(fmt::format("unknown task '{}'", name));
}

// ---------------------------------------------------------------------------
// ClassRegistry

ClassRegistry::ClassRegistry() : names_{std::string(kBackgroundName)} {}

ClassRegistry::ClassRegistry(const std::vector<std::string>& names) : ClassRegistry() {
  for (const auto& name : names) {
    if (name.empty()) throw ArgumentError("class names must be nonempty");
    if (find(name)) throw ArgumentError(fmt::format("duplicate class name '{}'", name));
    names_.push_back(name);
  }
}

const std::string& ClassRegistry::name(ClassId id) const {
  if (!contains(id)) throw ArgumentError(fmt::format("unregistered class id {}", id));
  return names_[static_cast<std::size_t>(id)];
}

std::optional<ClassId> ClassRegistry::find(std::string_view name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return static_cast<ClassId>(it - names_.begin());
}

// ---------------------------------------------------------------------------
// Dataset

void Dataset::resize_storage(std::size_t old_annotator_count) {
  std::vector<std::optional<Annotation>> grown(frames.size() * annotators.size());
  for (FrameIndex f = 0; f < frames.size(); ++f) {
    for (AnnotatorIndex a = 0; a < old_annotator_count; ++a) {
      const auto old_slot = f * old_annotator_count + a;
      if (old_slot < annotations_.size()) grown[slot(f, a)] = std::move(annotations_[old_slot]);
    }
  }
  annotations_ = std::move(grown);
}

AnnotatorIndex Dataset::add_annotator(std::string id, bool is_model) {
  const auto old_count = annotators.size();
  annotators.push_back({std::move(id), is_model});
  resize_storage(old_count);
  return old_count;
}

void Dataset::add_slide(std::string id) { slides.push_back(std::move(id)); }

FrameIndex Dataset::add_frame(Frame frame) {
  frames.push_back(std::move(frame));
  annotations_.resize(frames.size() * annotators.size());
  return frames.size() - 1;
}

void Dataset::set_annotation(FrameIndex frame, AnnotatorIndex annotator, Annotation annotation) {
  if (frame >= frames.size() || annotator >= annotators.size()) {
    throw ArgumentError("annotation refers to an unknown frame or annotator");
  }
  annotations_[slot(frame, annotator)] = std::move(annotation);
}

const Annotation* Dataset::annotation(FrameIndex frame, AnnotatorIndex annotator) const {
  if (frame >= frames.size() || annotator >= annotators.size()) return nullptr;
  const auto& entry = annotations_[slot(frame, annotator)];
  return entry ? &*entry : nullptr;
}

std::optional<AnnotatorIndex> Dataset::find_annotator(std::string_view id) const {
  for (AnnotatorIndex a = 0; a < annotators.size(); ++a) {
    if (annotators[a].id == id) return a;
  }
  return std::nullopt;
}

std::optional<FrameIndex> Dataset::find_frame(std::string_view id) const {
  for (FrameIndex f = 0; f < frames.size(); ++f) {
    if (frames[f].id == id) return f;
  }
  return std::nullopt;
}

AnnotatorIndex Dataset::annotator_index(std::string_view id) const {
  if (auto a = find_annotator(id)) return *a;
  throw ArgumentError(fmt::format("unknown annotator '{}'", id));
}

std::optional<AnnotatorIndex> Dataset::model() const {
  for (AnnotatorIndex a = 0; a < annotators.size(); ++a) {
    if (annotators[a].is_model) return a;
  }
  return std::nullopt;
}

std::vector<AnnotatorIndex> Dataset::pathologists() const {
  std::vector<AnnotatorIndex> out;
  for (AnnotatorIndex a = 0; a < annotators.size(); ++a) {
    if (!annotators[a].is_model) out.push_back(a);
  }
  return out;
}

std::vector<FrameIndex> Dataset::frames_of(Task task) const {
  std::vector<FrameIndex> out;
  for (FrameIndex f = 0; f < frames.size(); ++f) {
    if (frames[f].task == task) out.push_back(f);
  }
  return out;
}

std::size_t Dataset::pathologist_count(FrameIndex frame) const {
  std::size_t n = 0;
  for (AnnotatorIndex a = 0; a < annotators.size(); ++a) {
    if (!annotators[a].is_model && has_annotation(frame, a)) ++n;
  }
  return n;
}

void Dataset::remove_frame(FrameIndex frame) {
  if (frame >= frames.size()) throw ArgumentError("frame index out of range");
  const auto first = annotations_.begin() + static_cast<std::ptrdiff_t>(slot(frame, 0));
  annotations_.erase(first, first + static_cast<std::ptrdiff_t>(annotators.size()));
  frames.erase(frames.begin() + static_cast<std::ptrdiff_t>(frame));
}

// ---------------------------------------------------------------------------
// Validation

namespace {

class Reporter {
 public:
  void add(std::string frame, std::string annotator, std::string rule) {
    Violation v{std::move(frame), std::move(annotator), std::move(rule)};
    if (seen_.insert(fmt::format("{}\x1f{}\x1f{}", v.frame_id, v.annotator_id, v.rule)).second) {
      report_.violations.push_back(std::move(v));
    }
  }
  ValidationReport take() { return std::move(report_); }

 private:
  ValidationReport report_;
  std::unordered_set<std::string> seen_;
};

bool annotation_matches_task(const Annotation& a, Task task) {
  switch (task) {
    case Task::tissue: return std::holds_alternative<LabelGrid>(a);
    case Task::cell_class: return std::holds_alternative<CellPointSet>(a);
    case Task::cell_count: return std::holds_alternative<CountVector>(a);
  }
  return false;
}

void check_annotation(const Dataset& d, const Frame& frame, const Annotator& who,
                      const Annotation& annotation, Reporter& out) {
  const auto report = [&](std::string rule) { out.add(frame.id, who.id, std::move(rule)); };
  if (!annotation_matches_task(annotation, frame.task)) {
    report("annotation type does not match task");
    return;
  }
  std::visit(
      [&](const auto& a) {
        if (a.frame_id != frame.id || a.annotator_id != who.id) {
          report("annotation identity mismatch");
        }
      },
      annotation);

  if (const auto* grid = std::get_if<LabelGrid>(&annotation)) {
    if (grid->width != frame.width_px || grid->height != frame.height_px ||
        grid->labels.size() != static_cast<std::size_t>(frame.width_px) * frame.height_px) {
      report("dimension mismatch");
    }
    for (ClassId c : grid->labels) {
      if (!d.classes.contains(c)) {
        report("unknown class id");
        break;
      }
    }
  } else if (const auto* cells = std::get_if<CellPointSet>(&annotation)) {
    for (const auto& p : cells->points) {
      if (p.class_id == kBackground) {
        report("background class in point set");
      } else if (!d.classes.contains(p.class_id)) {
        report("unknown class id");
      }
      if (!(p.x >= 0.0 && p.x < frame.width_px && p.y >= 0.0 && p.y < frame.height_px)) {
        report("point outside frame");
      }
    }
  } else if (const auto* counts = std::get_if<CountVector>(&annotation)) {
    for (std::size_t c = 0; c < counts->counts.size(); ++c) {
      const auto value = counts->counts[c];
      if (value < 0) report("negative count");
      if (c == 0 && value != 0) report("background class in count vector");
      if (c >= d.classes.size() && value != 0) report("unknown class id");
    }
  }
}

}  // namespace

ValidationReport validate_dataset(const Dataset& d) {
  Reporter out;

  std::size_t models = 0;
  std::set<std::string> annotator_ids;
  for (const auto& a : d.annotators) {
    if (a.is_model) ++models;
    if (!annotator_ids.insert(a.id).second) out.add("", a.id, "duplicate annotator id");
  }
  if (models == 0) out.add("", "", "no model annotator");
  if (models > 1) out.add("", "", "more than one model annotator");

  std::set<std::string> slide_ids;
  for (const auto& s : d.slides) {
    if (!slide_ids.insert(s).second) out.add("", "", fmt::format("duplicate slide id '{}'", s));
  }

  std::set<std::string> frame_ids;
  const auto model = d.model();
  for (FrameIndex f = 0; f < d.frames.size(); ++f) {
    const auto& frame = d.frames[f];
    if (!frame_ids.insert(frame.id).second) out.add(frame.id, "", "duplicate frame id");
    if (!slide_ids.count(frame.slide_id)) out.add(frame.id, "", "undeclared slide");
    if (frame.width_px <= 0 || frame.height_px <= 0) out.add(frame.id, "", "nonpositive frame size");
    if (!(frame.microns_per_pixel > 0.0)) out.add(frame.id, "", "nonpositive microns_per_pixel");
    if (model && !d.has_annotation(f, *model)) {
      out.add(frame.id, d.annotators[*model].id, "model annotation missing");
    }
    if (d.pathologist_count(f) < 2) out.add(frame.id, "", "fewer than two pathologists");
    for (AnnotatorIndex a = 0; a < d.annotators.size(); ++a) {
      if (const auto* annotation = d.annotation(f, a)) {
        check_annotation(d, frame, d.annotators[a], *annotation, out);
      }
    }
  }
  return out.take();
}

void normalize_counts(Dataset& d) {
  for (FrameIndex f = 0; f < d.frames.size(); ++f) {
    for (AnnotatorIndex a = 0; a < d.annotators.size(); ++a) {
      const auto* annotation = d.annotation(f, a);
      if (!annotation) continue;
      if (const auto* counts = std::get_if<CountVector>(annotation)) {
        if (counts->counts.size() < d.classes.size()) {
          auto filled = *counts;
          filled.counts.resize(d.classes.size(), 0);
          d.set_annotation(f, a, std::move(filled));
        }
      }
    }
  }
}

std::vector<std::string> exclude_underannotated_frames(Dataset& d) {
  std::vector<std::string> warnings;
  for (FrameIndex f = d.frames.size(); f-- > 0;) {
    const auto n = d.pathologist_count(f);
    if (n < 2) {
      warnings.push_back(fmt::format(
          "frame '{}' excluded: annotated by {} pathologist(s), at least 2 required",
          d.frames[f].id, n));
      d.remove_frame(f);
    }
  }
  std::reverse(warnings.begin(), warnings.end());
  return warnings;
}

}  // namespace pf
