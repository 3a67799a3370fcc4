#include "csv.hpp"

#include <charconv>
#include <fstream>
#include <system_error>

#include <fmt/format.h>

#include "pairframes/error.hpp"

namespace pf::csv {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::vector<Row> read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(fmt::format("cannot open '{}'", path.string()));
  std::vector<Row> rows;
  std::string line;
  while (std::getline(in, line)) {
    const auto body = trim(line);
    if (body.empty()) continue;
    Row row;
    std::size_t start = 0;
    while (true) {
      const auto comma = body.find(',', start);
      row.emplace_back(trim(body.substr(start, comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::int64_t parse_int(std::string_view text, std::string_view what) {
  std::int64_t value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw InputError(fmt::format("invalid integer '{}' for {}", text, what));
  }
  return value;
}

double parse_double(std::string_view text, std::string_view what) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw InputError(fmt::format("invalid number '{}' for {}", text, what));
  }
  return value;
}

std::string format_double(double value) { return fmt::format("{}", value); }

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string join(const Row& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += ',';
    out += escape(fields[i]);
  }
  return out;
}

}  // namespace pf::csv
