#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace geoaudit::text {

std::string_view trim(std::string_view s);
std::string to_lower(std::string_view s);
std::string to_upper(std::string_view s);
bool iequals(std::string_view a, std::string_view b);
bool icontains(std::string_view haystack, std::string_view needle);
std::vector<std::string_view> split(std::string_view s, char sep);
// Splits on runs of spaces/tabs.
std::vector<std::string_view> split_ws(std::string_view s);
bool starts_with_digit(std::string_view s);

// Reads a whole file, transparently inflating gzip input. Throws
// Error(UnreadableStream) naming the path.
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

// Replaces invalid UTF-8 sequences with U+FFFD.
std::string sanitize_utf8(std::string_view s);

// Iterates data lines of a text blob: strips CR, skips blank lines and lines
// whose first non-space character is '#'.
std::vector<std::string_view> data_lines(std::string_view blob);

// 64-bit FNV-1a. Stable across platforms, used wherever a seedable hash of a
// string has to be reproducible.
std::uint64_t fnv1a64(std::string_view s, std::uint64_t basis = 0xcbf29ce484222325ULL);

// Orders all-digit strings numerically and everything else bytewise; digit
// strings sort before the rest.
bool natural_less(std::string_view a, std::string_view b);

}  // namespace geoaudit::text
