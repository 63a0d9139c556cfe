#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace bomf {

/// Writes to a sibling temp file and renames it over `path`, so readers
/// never observe a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

[[nodiscard]] std::string read_file(const std::filesystem::path& path);

/// Shortest round-trip decimal representation ("%.17g").
[[nodiscard]] std::string format_double(double v);

/// Values joined by ';' (used for vector-valued CSV cells).
[[nodiscard]] std::string join_doubles(std::span<const double> values);

} // namespace bomf
