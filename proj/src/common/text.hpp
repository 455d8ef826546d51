#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace comira {

bool is_valid_utf8(std::string_view s) noexcept;

inline bool is_ascii_alpha(char c) noexcept {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

inline char ascii_lower(char c) noexcept {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

std::string to_lower_ascii(std::string_view s);
std::string_view trim(std::string_view s) noexcept;
std::vector<std::string_view> split(std::string_view s, char delim);

// Reads a whole file; throws Errc::io when it cannot be opened.
std::string read_file(const std::string& path);
// Writes via a temporary sibling and rename; throws Errc::io.
void write_file_atomic(const std::string& path, std::string_view bytes);

}  // namespace comira
