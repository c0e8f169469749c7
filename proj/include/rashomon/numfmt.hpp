#pragma once

#include <string>

namespace rashomon {

/// Shortest-exact text form with 17 significant digits ("%.17g").
std::string format_full(double value);
/// Fixed 6-significant-digit form used for drawing coordinates ("%.6g").
std::string format_short(double value);

/// Writes `content` to a temporary sibling file and renames it over `path`,
/// so readers never observe a partially written file.
void write_file_atomic(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace rashomon
