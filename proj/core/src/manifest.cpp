// Manifest loading and writing for pairframes datasets.
//
// A manifest is a JSON document:
//
//   {
//     "classes":     [{"id": 0, "name": "background"}, {"id": 1, "name": "tumor"}, ...],
//     "annotators":  [{"id": "model", "is_model": true}, {"id": "P1", "is_model": false}],
//     "slides":      [{"id": "S1"}],
//     "frames":      [{"id": "F1", "slide": "S1", "width_px": 64, "height_px": 64,
//                      "mpp": 0.5, "task": "tissue"}],
//     "annotations": [{"frame": "F1", "annotator": "P1", "path": "annotations/F1__P1.csv"}]
//   }
//
// Annotation paths are resolved relative to the manifest's directory. The
// background entry may be omitted from `classes`; it is always id 0.

#include <fstream>
#include <map>
#include <set>

#include <fmt/format.h>

#include "csv.hpp"
#include "io.hpp"
#include "json.hpp"
#include "pairframes/dataset.hpp"
#include "pairframes/error.hpp"

namespace pf {
namespace {

using nlohmann::json;

const json& require(const json& obj, const char* key, std::string_view context) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw InputError(fmt::format("malformed manifest: {} is missing '{}'", context, key));
  }
  return obj.at(key);
}

template <class T>
T get_as(const json& obj, const char* key, std::string_view context) {
  try {
    return require(obj, key, context).get<T>();
  } catch (const json::exception& e) {
    throw InputError(fmt::format("malformed manifest: {}.{}: {}", context, key, e.what()));
  }
}

const json& require_array(const json& root, const char* key) {
  const auto& value = require(root, key, "manifest");
  if (!value.is_array()) {
    throw InputError(fmt::format("malformed manifest: '{}' must be an array", key));
  }
  return value;
}

ClassRegistry parse_classes(const json& root) {
  std::map<std::int64_t, std::string> by_id;
  for (const auto& entry : require_array(root, "classes")) {
    const auto id = get_as<std::int64_t>(entry, "id", "classes[]");
    auto name = get_as<std::string>(entry, "name", "classes[]");
    if (!by_id.emplace(id, std::move(name)).second) {
      throw InputError(fmt::format("malformed manifest: duplicate class id {}", id));
    }
  }
  if (auto it = by_id.find(0); it != by_id.end()) {
    if (it->second != kBackgroundName) {
      throw InputError("malformed manifest: class 0 must be named 'background'");
    }
    by_id.erase(it);
  }
  std::vector<std::string> names;
  std::int64_t expected = 1;
  for (auto& [id, name] : by_id) {
    if (id != expected) {
      throw InputError("malformed manifest: class ids must be contiguous from 0");
    }
    names.push_back(std::move(name));
    ++expected;
  }
  try {
    return ClassRegistry(names);
  } catch (const ArgumentError& e) {
    throw InputError(fmt::format("malformed manifest: {}", e.what()));
  }
}

ClassId checked_class(const Dataset& d, std::int64_t id, const std::filesystem::path& file) {
  if (id < 0 || !d.classes.contains(static_cast<ClassId>(id))) {
    throw InputError(fmt::format("unknown class_id {} in '{}'", id, file.string()));
  }
  return static_cast<ClassId>(id);
}

LabelGrid load_grid(const Dataset& d, const Frame& frame, const std::string& annotator,
                    const std::filesystem::path& file) {
  const auto rows = csv::read_file(file);
  if (rows.size() != static_cast<std::size_t>(frame.height_px)) {
    throw InputError(fmt::format("dimension mismatch in '{}': {} rows, frame height is {}",
                                 file.string(), rows.size(), frame.height_px));
  }
  LabelGrid grid{frame.id, annotator, frame.width_px, frame.height_px, {}};
  grid.labels.reserve(static_cast<std::size_t>(frame.width_px) * frame.height_px);
  for (const auto& row : rows) {
    if (row.size() != static_cast<std::size_t>(frame.width_px)) {
      throw InputError(fmt::format("dimension mismatch in '{}': row of {} columns, frame width is {}",
                                   file.string(), row.size(), frame.width_px));
    }
    for (const auto& cell : row) {
      grid.labels.push_back(checked_class(d, csv::parse_int(cell, "class_id"), file));
    }
  }
  return grid;
}

void expect_header(const std::vector<csv::Row>& rows, const csv::Row& header,
                   const std::filesystem::path& file) {
  if (rows.empty() || rows.front() != header) {
    throw InputError(fmt::format("malformed annotation file '{}': expected header '{}'",
                                 file.string(), csv::join(header)));
  }
}

CellPointSet load_points(const Dataset& d, const Frame& frame, const std::string& annotator,
                         const std::filesystem::path& file) {
  const auto rows = csv::read_file(file);
  expect_header(rows, {"x", "y", "class_id"}, file);
  CellPointSet set{frame.id, annotator, {}};
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.size() != 3) {
      throw InputError(fmt::format("malformed annotation file '{}' at line {}", file.string(), i + 1));
    }
    set.points.push_back({csv::parse_double(row[0], "x"), csv::parse_double(row[1], "y"),
                          checked_class(d, csv::parse_int(row[2], "class_id"), file)});
  }
  return set;
}

CountVector load_counts(const Dataset& d, const Frame& frame, const std::string& annotator,
                        const std::filesystem::path& file) {
  const auto rows = csv::read_file(file);
  expect_header(rows, {"class_id", "count"}, file);
  CountVector counts{frame.id, annotator, std::vector<std::int64_t>(d.classes.size(), 0)};
  std::set<ClassId> seen;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.size() != 2) {
      throw InputError(fmt::format("malformed annotation file '{}' at line {}", file.string(), i + 1));
    }
    const auto id = checked_class(d, csv::parse_int(row[0], "class_id"), file);
    const auto value = csv::parse_int(row[1], "count");
    if (id == kBackground) {
      throw InputError(fmt::format("background class in count file '{}'", file.string()));
    }
    if (value < 0) throw InputError(fmt::format("negative count in '{}'", file.string()));
    if (!seen.insert(id).second) {
      throw InputError(fmt::format("duplicate class_id {} in '{}'", id, file.string()));
    }
    counts.counts[static_cast<std::size_t>(id)] = value;
  }
  return counts;
}

}  // namespace

namespace detail {

std::string safe_name(std::string_view id) {
  std::string out;
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                    c == '-' || c == '_' || c == '.';
    out += ok ? c : '_';
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError(fmt::format("cannot write '{}'", path.string()));
  out << text;
  if (!out) throw InputError(fmt::format("write failed for '{}'", path.string()));
}

std::string annotation_text(const Annotation& annotation) {
  std::string text;
  if (const auto* grid = std::get_if<LabelGrid>(&annotation)) {
    for (int r = 0; r < grid->height; ++r) {
      for (int c = 0; c < grid->width; ++c) {
        if (c) text += ',';
        text += std::to_string(grid->at(r, c));
      }
      text += '\n';
    }
  } else if (const auto* cells = std::get_if<CellPointSet>(&annotation)) {
    text = "x,y,class_id\n";
    for (const auto& p : cells->points) {
      text += fmt::format("{},{},{}\n", csv::format_double(p.x), csv::format_double(p.y), p.class_id);
    }
  } else {
    const auto& counts = std::get<CountVector>(annotation);
    text = "class_id,count\n";
    for (std::size_t c = 1; c < counts.counts.size(); ++c) {
      text += fmt::format("{},{}\n", c, counts.counts[c]);
    }
  }
  return text;
}

}  // namespace detail

using detail::annotation_text;
using detail::safe_name;
using detail::write_text;

ManifestLoad load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(fmt::format("cannot open manifest '{}'", path.string()));
  json root;
  try {
    root = json::parse(in);
  } catch (const json::exception& e) {
    throw InputError(fmt::format("malformed manifest '{}': {}", path.string(), e.what()));
  }
  if (!root.is_object()) throw InputError("malformed manifest: top level must be an object");

  Dataset d;
  d.classes = parse_classes(root);

  std::size_t models = 0;
  for (const auto& entry : require_array(root, "annotators")) {
    auto id = get_as<std::string>(entry, "id", "annotators[]");
    const bool is_model = entry.contains("is_model") && get_as<bool>(entry, "is_model", "annotators[]");
    if (d.find_annotator(id)) throw InputError(fmt::format("duplicate annotator '{}'", id));
    models += is_model ? 1 : 0;
    d.add_annotator(std::move(id), is_model);
  }
  if (models != 1) {
    throw InputError(fmt::format("manifest must flag exactly one model annotator, found {}", models));
  }

  std::set<std::string> slide_ids;
  for (const auto& entry : require_array(root, "slides")) {
    auto id = get_as<std::string>(entry, "id", "slides[]");
    if (!slide_ids.insert(id).second) throw InputError(fmt::format("duplicate slide '{}'", id));
    d.add_slide(std::move(id));
  }

  for (const auto& entry : require_array(root, "frames")) {
    Frame frame;
    frame.id = get_as<std::string>(entry, "id", "frames[]");
    frame.slide_id = get_as<std::string>(entry, "slide", "frames[]");
    frame.width_px = get_as<int>(entry, "width_px", "frames[]");
    frame.height_px = get_as<int>(entry, "height_px", "frames[]");
    frame.microns_per_pixel = get_as<double>(entry, "mpp", "frames[]");
    try {
      frame.task = parse_task(get_as<std::string>(entry, "task", "frames[]"));
    } catch (const ArgumentError& e) {
      throw InputError(fmt::format("malformed manifest: {}", e.what()));
    }
    if (d.find_frame(frame.id)) throw InputError(fmt::format("duplicate frame '{}'", frame.id));
    if (!slide_ids.count(frame.slide_id)) {
      throw InputError(fmt::format("frame '{}' references undeclared slide '{}'", frame.id, frame.slide_id));
    }
    if (frame.width_px <= 0 || frame.height_px <= 0 || !(frame.microns_per_pixel > 0.0)) {
      throw InputError(fmt::format("frame '{}' has nonpositive size or mpp", frame.id));
    }
    d.add_frame(std::move(frame));
  }

  const auto base = path.parent_path();
  for (const auto& entry : require_array(root, "annotations")) {
    const auto frame_id = get_as<std::string>(entry, "frame", "annotations[]");
    const auto annotator_id = get_as<std::string>(entry, "annotator", "annotations[]");
    const auto file = base / get_as<std::string>(entry, "path", "annotations[]");
    const auto f = d.find_frame(frame_id);
    const auto a = d.find_annotator(annotator_id);
    if (!f) throw InputError(fmt::format("annotation references unknown frame '{}'", frame_id));
    if (!a) throw InputError(fmt::format("annotation references unknown annotator '{}'", annotator_id));
    if (d.has_annotation(*f, *a)) {
      throw InputError(fmt::format("duplicate annotation for ({}, {})", frame_id, annotator_id));
    }
    const auto& frame = d.frames[*f];
    switch (frame.task) {
      case Task::tissue: d.set_annotation(*f, *a, load_grid(d, frame, annotator_id, file)); break;
      case Task::cell_class: d.set_annotation(*f, *a, load_points(d, frame, annotator_id, file)); break;
      case Task::cell_count: d.set_annotation(*f, *a, load_counts(d, frame, annotator_id, file)); break;
    }
  }

  normalize_counts(d);
  ManifestLoad result;
  // Problems other than thin panels are reported against the dataset as
  // declared, before under-annotated frames are dropped.
  for (auto& v : validate_dataset(d).violations) {
    if (v.rule != "fewer than two pathologists") result.report.violations.push_back(std::move(v));
  }
  result.warnings = exclude_underannotated_frames(d);
  result.dataset = std::move(d);
  return result;
}

Dataset parse_manifest(const std::filesystem::path& path, std::vector<std::string>* warnings) {
  auto loaded = load_manifest(path);
  if (!loaded.report.empty()) {
    const auto& v = loaded.report.violations.front();
    throw InputError(fmt::format("invalid dataset ({} violation(s)); first: {} [frame '{}', annotator '{}']",
                                 loaded.report.size(), v.rule, v.frame_id, v.annotator_id));
  }
  if (warnings) warnings->insert(warnings->end(), loaded.warnings.begin(), loaded.warnings.end());
  return std::move(loaded.dataset);
}

void write_dataset(const Dataset& d, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir / "annotations", ec);
  if (ec) throw InputError(fmt::format("cannot create '{}': {}", dir.string(), ec.message()));

  json root;
  root["classes"] = json::array();
  for (std::size_t c = 0; c < d.classes.size(); ++c) {
    root["classes"].push_back({{"id", c}, {"name", d.classes.names()[c]}});
  }
  root["annotators"] = json::array();
  for (const auto& a : d.annotators) root["annotators"].push_back({{"id", a.id}, {"is_model", a.is_model}});
  root["slides"] = json::array();
  for (const auto& s : d.slides) root["slides"].push_back({{"id", s}});
  root["frames"] = json::array();
  for (const auto& f : d.frames) {
    root["frames"].push_back({{"id", f.id},
                              {"slide", f.slide_id},
                              {"width_px", f.width_px},
                              {"height_px", f.height_px},
                              {"mpp", f.microns_per_pixel},
                              {"task", std::string(to_string(f.task))}});
  }
  root["annotations"] = json::array();
  for (FrameIndex f = 0; f < d.frames.size(); ++f) {
    for (AnnotatorIndex a = 0; a < d.annotators.size(); ++a) {
      const auto* annotation = d.annotation(f, a);
      if (!annotation) continue;
      const auto rel = fmt::format("annotations/f{}_a{}_{}__{}.csv", f, a, safe_name(d.frames[f].id),
                                   safe_name(d.annotators[a].id));
      write_text(dir / rel, annotation_text(*annotation));
      root["annotations"].push_back(
          {{"frame", d.frames[f].id}, {"annotator", d.annotators[a].id}, {"path", rel}});
    }
  }
  write_text(dir / "manifest.json", root.dump(2) + "\n");
}

}  // namespace pf
