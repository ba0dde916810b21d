#pragma once

#include <string>

#include "lada/error.hpp"

namespace lada {

/// Reads a whole file; throws DataError when it cannot be opened.
std::string read_file(const std::string& path);

/// Writes a whole file; throws DataError when it cannot be written.
void write_file(const std::string& path, const std::string& content);

}  // namespace lada
