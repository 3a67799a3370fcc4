#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pairframes/dataset.hpp"

namespace pf {

/// How one annotator deviates from the hidden truth.
struct ErrorModel {
  /// Probability that a tissue patch or a cell gets a different nonzero class.
  double flip_rate = 0.0;
  /// Probability that a tissue patch or a cell is missed entirely.
  double drop_rate = 0.0;
  /// Expected number of spurious patches or cells per frame.
  double spurious_rate = 0.0;
  /// Standard deviation (px) of cell locations and patch edges.
  double jitter_px = 0.0;
  /// Standard deviation of additive noise on per-class counts (rounded).
  double count_noise = 0.0;
};

struct PanelConfig {
  Task task = Task::cell_class;
  int slides = 10;
  int frames_per_slide = 5;
  /// When positive, overrides frames_per_slide: this many frames are spread
  /// over the slides as evenly as possible (earlier slides get the extras).
  int total_frames = 0;
  int frame_width_px = 64;
  int frame_height_px = 64;
  double microns_per_pixel = 0.5;
  int classes = 3;
  int pathologists = 4;
  /// Probability that a given pathologist annotates a given frame.
  double coverage = 1.0;
  /// Tissue: rectangles of random class painted per frame.
  int patches_per_frame = 6;
  /// Cells: expected number of cells of each class per frame.
  double cells_per_class = 8.0;
  ErrorModel pathologist_error;
  ErrorModel model_error;
  std::uint64_t seed = 1;
};

/// Throws ArgumentError for out-of-range fields.
void validate(const PanelConfig& config);

/// Reads a JSON config; absent keys keep their defaults. Error models are
/// objects under "pathologist_error" and "model_error".
PanelConfig panel_config_from_json(const std::string& text);
PanelConfig load_panel_config(const std::filesystem::path& path);

struct SimulatedPanel {
  Dataset dataset;
  /// Hidden truth, one annotation per generated frame (annotator "truth").
  std::vector<Annotation> truth;
  /// Frames dropped for having fewer than two pathologists.
  std::vector<std::string> warnings;
};

/// Builds a synthetic panel. Annotators are independent corruptions of the
/// truth. Frame f draws from child_seed(seed, f), and each (frame,
/// annotator) from a further child stream, so changing one annotator's error
/// model leaves every other annotation unchanged. Deterministic in `seed`.
SimulatedPanel generate_panel(const PanelConfig& config);

/// Writes the dataset (manifest + annotations) and the truth sidecar under
/// `dir/truth/`, which evaluation never reads.
void write_panel(const SimulatedPanel& panel, const std::filesystem::path& dir);

}  // namespace pf
