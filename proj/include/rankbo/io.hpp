#pragma once

#include <functional>
#include <iosfwd>
#include <string>

namespace rankbo {

/// Writes through a sibling temporary file and renames it over `path`, so
/// readers never observe a partially written file. Parent directories are
/// created as needed.
void write_file_atomic(const std::string& path, const std::function<void(std::ostream&)>& writer, bool binary = false);

std::string read_text_file(const std::string& path);

/// Shortest round-trip decimal form of a double ("nan" for NaN).
std::string format_double(double value);

}  // namespace rankbo
