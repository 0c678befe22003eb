#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gmmimm::io {

/// Shortest decimal representation that round-trips to the same double.
std::string format_double(double value);

/// Parses a whole field as a double; nullopt on any trailing garbage.
std::optional<double> parse_double(std::string_view text);

/// Splits one CSV line on commas and trims surrounding blanks of each field.
std::vector<std::string_view> split_csv_line(std::string_view line);

std::string read_file(const std::filesystem::path &file);

/// Writes to a sibling temporary file and renames it over `file`.
void write_file_atomic(const std::filesystem::path &file, std::string_view contents);

} // namespace gmmimm::io
