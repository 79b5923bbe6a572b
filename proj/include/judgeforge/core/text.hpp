#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace judgeforge::text {

// Collapses every run of whitespace into one ASCII space and trims both ends.
std::string collapse_whitespace(std::string_view s);

// ASCII-only lowercasing; multi-byte UTF-8 sequences pass through unchanged.
std::string lowercase_ascii(std::string_view s);

std::vector<std::string> split_whitespace(std::string_view s);

// Number of Unicode scalar values in a UTF-8 string.
std::size_t utf8_length(std::string_view s);

std::string_view rtrim(std::string_view s);

std::size_t count_occurrences(std::string_view haystack, std::string_view needle);

bool contains(std::string_view haystack, std::string_view needle);

std::string hex_encode(const unsigned char* data, std::size_t len);

}  // namespace judgeforge::text
