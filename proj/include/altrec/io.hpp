#pragma once

// Small helpers shared by the text and binary file formats.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "altrec/error.hpp"

namespace altrec::io {

std::vector<std::string> split(std::string_view line, char sep);
std::string_view trim(std::string_view s);

/// Opens a file for reading; throws MissingFileError if it cannot be opened.
std::ifstream open_input(const std::filesystem::path& path, bool binary = false);
std::ofstream open_output(const std::filesystem::path& path, bool binary = false);

/// Shortest round-trip decimal rendering of a double (%.17g).
std::string format_double(double v);

// Binary helpers. All multi-byte values are written in host byte order, which
// the formats document as little-endian.
template <typename T>
void write_pod(std::ostream& out, const T& value) {
  static_assert(std::is_trivially_copyable_v<T>);
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  static_assert(std::is_trivially_copyable_v<T>);
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw DataError("unexpected end of binary file");
  return value;
}

void write_string(std::ostream& out, std::string_view s);
std::string read_string(std::istream& in, std::uint32_t max_len = 1u << 20);

void write_doubles(std::ostream& out, const std::vector<double>& v);
void read_doubles(std::istream& in, std::vector<double>& v);

}  // namespace altrec::io
