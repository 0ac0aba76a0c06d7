#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace gripkit::detail {

std::string read_text_file(const std::filesystem::path& path);

/// Writes to `<path>.tmp`, flushes it to disk and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content, bool sync = true);

}  // namespace gripkit::detail
