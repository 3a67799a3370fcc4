#pragma once

#include <filesystem>
#include <string>

#include "pairframes/dataset.hpp"

namespace pf::detail {

/// File body for an annotation in the format parse_manifest expects.
std::string annotation_text(const Annotation& annotation);

/// Writes `text` to `path`, throwing InputError on failure.
void write_text(const std::filesystem::path& path, const std::string& text);

/// Replaces characters outside [A-Za-z0-9._-] with '_'.
std::string safe_name(std::string_view id);

}  // namespace pf::detail
