#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace altrec {

/// Lowercase hex SHA-256 of a byte buffer.
std::string sha256_hex(std::string_view bytes);

/// Lowercase hex SHA-256 of a file's contents. Throws MissingFileError.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace altrec
