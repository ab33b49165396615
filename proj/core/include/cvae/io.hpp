#pragma once

#include <string>

namespace cvae {

// Writes to a temp file in the same directory, then renames into place.
void write_file_atomic(const std::string& path, const std::string& content);

std::string read_file(const std::string& path);

}  // namespace cvae
