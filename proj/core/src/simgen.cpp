#include "pairframes/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "io.hpp"
#include "json.hpp"
#include "pairframes/error.hpp"
#include "pairframes/rng.hpp"

namespace pf {
namespace {

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

void validate(const ErrorModel& e, std::string_view who) {
  if (!is_probability(e.flip_rate) || !is_probability(e.drop_rate)) {
    throw ArgumentError(fmt::format("{}: flip and drop rates must lie in [0, 1]", who));
  }
  if (!(e.spurious_rate >= 0.0) || !(e.jitter_px >= 0.0) || !(e.count_noise >= 0.0)) {
    throw ArgumentError(fmt::format("{}: spurious rate, jitter and count noise must be >= 0", who));
  }
}

struct Patch {
  int x0, y0, x1, y1;  // half-open
  ClassId class_id;
};

ClassId other_class(Rng& rng, ClassId current, int classes) {
  if (classes < 2) return current;
  auto pick = static_cast<ClassId>(1 + rng.uniform_index(static_cast<std::uint64_t>(classes - 1)));
  return pick >= current ? pick + 1 : pick;
}

ClassId random_class(Rng& rng, int classes) {
  return static_cast<ClassId>(1 + rng.uniform_index(static_cast<std::uint64_t>(classes)));
}

Patch random_patch(Rng& rng, const PanelConfig& c) {
  const auto span = [&](int extent) {
    const int lo = std::max(1, extent / 8);
    const int hi = std::max(lo, extent / 2);
    return lo + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(hi - lo + 1)));
  };
  const int w = span(c.frame_width_px);
  const int h = span(c.frame_height_px);
  const int x0 = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(c.frame_width_px - w + 1)));
  const int y0 = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(c.frame_height_px - h + 1)));
  return {x0, y0, x0 + w, y0 + h, random_class(rng, c.classes)};
}

LabelGrid paint(const std::vector<Patch>& patches, const PanelConfig& c, const std::string& frame_id,
                const std::string& annotator) {
  LabelGrid grid{frame_id, annotator, c.frame_width_px, c.frame_height_px,
                 std::vector<ClassId>(static_cast<std::size_t>(c.frame_width_px) * c.frame_height_px, kBackground)};
  for (const auto& p : patches) {
    for (int y = std::max(0, p.y0); y < std::min(c.frame_height_px, p.y1); ++y) {
      for (int x = std::max(0, p.x0); x < std::min(c.frame_width_px, p.x1); ++x) {
        grid.labels[static_cast<std::size_t>(y) * c.frame_width_px + x] = p.class_id;
      }
    }
  }
  return grid;
}

std::vector<Patch> corrupt_patches(const std::vector<Patch>& truth, const ErrorModel& e, Rng& rng,
                                   const PanelConfig& c) {
  std::vector<Patch> out;
  const auto shift = [&](int v) {
    return e.jitter_px > 0.0 ? v + static_cast<int>(std::lround(e.jitter_px * rng.normal())) : v;
  };
  for (const auto& p : truth) {
    if (rng.bernoulli(e.drop_rate)) continue;
    Patch q = p;
    if (rng.bernoulli(e.flip_rate)) q.class_id = other_class(rng, p.class_id, c.classes);
    q.x0 = shift(q.x0);
    q.x1 = shift(q.x1);
    q.y0 = shift(q.y0);
    q.y1 = shift(q.y1);
    out.push_back(q);
  }
  const auto extra = e.spurious_rate > 0.0 ? rng.poisson(e.spurious_rate) : 0;
  for (std::uint64_t k = 0; k < extra; ++k) out.push_back(random_patch(rng, c));
  return out;
}

double clamp_coordinate(double v, int extent) {
  const double upper = std::nextafter(static_cast<double>(extent), 0.0);
  return std::clamp(v, 0.0, upper);
}

CellPoint random_cell(Rng& rng, const PanelConfig& c, ClassId cls) {
  return {rng.uniform(0.0, c.frame_width_px), rng.uniform(0.0, c.frame_height_px), cls};
}

std::vector<CellPoint> corrupt_cells(const std::vector<CellPoint>& truth, const ErrorModel& e, Rng& rng,
                                     const PanelConfig& c) {
  std::vector<CellPoint> out;
  for (const auto& p : truth) {
    if (rng.bernoulli(e.drop_rate)) continue;
    CellPoint q = p;
    if (rng.bernoulli(e.flip_rate)) q.class_id = other_class(rng, p.class_id, c.classes);
    if (e.jitter_px > 0.0) {
      // Truncated Gaussian: redraw out-of-frame offsets, clamp as a last resort.
      double x = q.x, y = q.y;
      for (int attempt = 0; attempt < 16; ++attempt) {
        x = p.x + e.jitter_px * rng.normal();
        y = p.y + e.jitter_px * rng.normal();
        if (x >= 0.0 && x < c.frame_width_px && y >= 0.0 && y < c.frame_height_px) break;
      }
      q.x = clamp_coordinate(x, c.frame_width_px);
      q.y = clamp_coordinate(y, c.frame_height_px);
    }
    out.push_back(q);
  }
  const auto extra = e.spurious_rate > 0.0 ? rng.poisson(e.spurious_rate) : 0;
  for (std::uint64_t k = 0; k < extra; ++k) out.push_back(random_cell(rng, c, random_class(rng, c.classes)));
  return out;
}

CountVector tally(const std::vector<CellPoint>& cells, const ErrorModel& e, Rng& rng, const PanelConfig& c,
                  const std::string& frame_id, const std::string& annotator) {
  CountVector v{frame_id, annotator, std::vector<std::int64_t>(static_cast<std::size_t>(c.classes) + 1, 0)};
  for (const auto& p : cells) ++v.counts[static_cast<std::size_t>(p.class_id)];
  if (e.count_noise > 0.0) {
    for (std::size_t k = 1; k < v.counts.size(); ++k) {
      v.counts[k] = std::max<std::int64_t>(0, v.counts[k] + std::llround(e.count_noise * rng.normal()));
    }
  }
  return v;
}

template <class T>
void read_field(const nlohmann::json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(fmt::format("panel config field '{}': {}", key, e.what()));
  }
}

ErrorModel read_error_model(const nlohmann::json& j) {
  ErrorModel e;
  read_field(j, "flip_rate", e.flip_rate);
  read_field(j, "drop_rate", e.drop_rate);
  read_field(j, "spurious_rate", e.spurious_rate);
  read_field(j, "jitter_px", e.jitter_px);
  read_field(j, "count_noise", e.count_noise);
  return e;
}

}  // namespace

void validate(const PanelConfig& c) {
  if (c.slides < 1 || c.frames_per_slide < 1) throw ArgumentError("need at least one slide and one frame per slide");
  if (c.total_frames < 0 || (c.total_frames > 0 && c.total_frames < c.slides)) {
    throw ArgumentError("total_frames must be 0 or at least the number of slides");
  }
  if (c.frame_width_px < 1 || c.frame_height_px < 1) throw ArgumentError("frame size must be positive");
  if (!(c.microns_per_pixel > 0.0)) throw ArgumentError("microns_per_pixel must be positive");
  if (c.classes < 1) throw ArgumentError("need at least one nonzero class");
  if (c.pathologists < 2) throw ArgumentError("need at least two pathologists");
  if (!is_probability(c.coverage)) throw ArgumentError("coverage must lie in [0, 1]");
  if (c.patches_per_frame < 0) throw ArgumentError("patches_per_frame must be >= 0");
  if (!(c.cells_per_class >= 0.0)) throw ArgumentError("cells_per_class must be >= 0");
  validate(c.pathologist_error, "pathologist_error");
  validate(c.model_error, "model_error");
}

PanelConfig panel_config_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(fmt::format("malformed panel config: {}", e.what()));
  }
  if (!j.is_object()) throw InputError("malformed panel config: expected an object");
  PanelConfig c;
  if (j.contains("task")) {
    std::string task;
    read_field(j, "task", task);
    try {
      c.task = parse_task(task);
    } catch (const ArgumentError& e) {
      throw InputError(e.what());
    }
  }
  read_field(j, "slides", c.slides);
  read_field(j, "frames_per_slide", c.frames_per_slide);
  read_field(j, "total_frames", c.total_frames);
  read_field(j, "frame_width_px", c.frame_width_px);
  read_field(j, "frame_height_px", c.frame_height_px);
  read_field(j, "microns_per_pixel", c.microns_per_pixel);
  read_field(j, "classes", c.classes);
  read_field(j, "pathologists", c.pathologists);
  read_field(j, "coverage", c.coverage);
  read_field(j, "patches_per_frame", c.patches_per_frame);
  read_field(j, "cells_per_class", c.cells_per_class);
  read_field(j, "seed", c.seed);
  if (j.contains("pathologist_error")) c.pathologist_error = read_error_model(j.at("pathologist_error"));
  if (j.contains("model_error")) c.model_error = read_error_model(j.at("model_error"));
  return c;
}

PanelConfig load_panel_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(fmt::format("cannot open panel config '{}'", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return panel_config_from_json(buffer.str());
}

SimulatedPanel generate_panel(const PanelConfig& c) {
  validate(c);
  SimulatedPanel panel;
  Dataset& d = panel.dataset;

  std::vector<std::string> names;
  for (int k = 1; k <= c.classes; ++k) names.push_back(fmt::format("class{}", k));
  d.classes = ClassRegistry(names);
  for (int p = 1; p <= c.pathologists; ++p) d.add_annotator(fmt::format("P{}", p), false);
  const auto model = d.add_annotator("model", true);

  for (int s = 0; s < c.slides; ++s) {
    const auto slide = fmt::format("S{:03}", s + 1);
    d.add_slide(slide);
    const int frames_here =
        c.total_frames > 0 ? c.total_frames / c.slides + (s < c.total_frames % c.slides ? 1 : 0) : c.frames_per_slide;
    for (int k = 0; k < frames_here; ++k) {
      d.add_frame({fmt::format("{}_F{:02}", slide, k + 1), slide, c.frame_width_px, c.frame_height_px,
                   c.microns_per_pixel, c.task});
    }
  }

  for (FrameIndex f = 0; f < d.frames.size(); ++f) {
    const auto& frame_id = d.frames[f].id;
    const auto frame_seed = child_seed(c.seed, f);
    Rng truth_rng(frame_seed);

    std::vector<Patch> truth_patches;
    std::vector<CellPoint> truth_cells;
    if (c.task == Task::tissue) {
      for (int k = 0; k < c.patches_per_frame; ++k) truth_patches.push_back(random_patch(truth_rng, c));
      panel.truth.emplace_back(paint(truth_patches, c, frame_id, "truth"));
    } else {
      for (int cls = 1; cls <= c.classes; ++cls) {
        const auto n = truth_rng.poisson(c.cells_per_class);
        for (std::uint64_t k = 0; k < n; ++k) truth_cells.push_back(random_cell(truth_rng, c, cls));
      }
      if (c.task == Task::cell_class) {
        panel.truth.emplace_back(CellPointSet{frame_id, "truth", truth_cells});
      } else {
        Rng none(0);
        panel.truth.emplace_back(tally(truth_cells, ErrorModel{}, none, c, frame_id, "truth"));
      }
    }

    for (AnnotatorIndex a = 0; a < d.annotators.size(); ++a) {
      Rng rng(child_seed(frame_seed, a + 1));
      const bool is_model = a == model;
      if (!is_model && !rng.bernoulli(c.coverage)) continue;
      const auto& error = is_model ? c.model_error : c.pathologist_error;
      const auto& who = d.annotators[a].id;
      switch (c.task) {
        case Task::tissue:
          d.set_annotation(f, a, paint(corrupt_patches(truth_patches, error, rng, c), c, frame_id, who));
          break;
        case Task::cell_class:
          d.set_annotation(f, a, CellPointSet{frame_id, who, corrupt_cells(truth_cells, error, rng, c)});
          break;
        case Task::cell_count: {
          const auto cells = corrupt_cells(truth_cells, error, rng, c);
          d.set_annotation(f, a, tally(cells, error, rng, c, frame_id, who));
          break;
        }
      }
    }
  }

  panel.warnings = exclude_underannotated_frames(d);
  return panel;
}

void write_panel(const SimulatedPanel& panel, const std::filesystem::path& dir) {
  write_dataset(panel.dataset, dir);
  std::error_code ec;
  std::filesystem::create_directories(dir / "truth", ec);
  if (ec) throw InputError(fmt::format("cannot create '{}': {}", (dir / "truth").string(), ec.message()));
  for (const auto& t : panel.truth) {
    const auto& frame_id = std::visit([](const auto& a) -> const std::string& { return a.frame_id; }, t);
    detail::write_text(dir / "truth" / (detail::safe_name(frame_id) + ".csv"), detail::annotation_text(t));
  }
}

}  // namespace pf
