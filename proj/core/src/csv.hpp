#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace pf::csv {

using Row = std::vector<std::string>;

/// Reads a comma-separated file. Fields are trimmed; blank lines are skipped.
/// Quoting is not supported: annotation files hold numbers only.
std::vector<Row> read_file(const std::filesystem::path& path);

std::int64_t parse_int(std::string_view text, std::string_view what);
double parse_double(std::string_view text, std::string_view what);

/// Shortest representation that parses back to the same double.
std::string format_double(double value);

/// Quotes a field if it contains a comma, quote or newline.
std::string escape(std::string_view field);

/// Joins escaped fields with commas (no trailing newline).
std::string join(const Row& fields);

}  // namespace pf::csv
