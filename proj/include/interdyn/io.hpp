#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace interdyn {

// Writes to a sibling temp file and renames it over `path`, so readers never
// observe a partially written file. Creates missing parent directories.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

// Shortest decimal string that parses back to exactly `value`.
std::string format_double(double value);

}  // namespace interdyn
