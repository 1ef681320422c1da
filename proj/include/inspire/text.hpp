#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

// UTF-8 aware helpers. A "character" throughout the engine is a Unicode code
// point; bytes that do not form a valid sequence count as one character each.
namespace inspire::text {

// Byte length of the code point starting at s[pos] (1 for invalid bytes).
std::size_t sequence_length(std::string_view s, std::size_t pos);

std::size_t char_count(std::string_view s);

// Byte offsets of every code point start, plus s.size() as a sentinel.
std::vector<std::size_t> char_offsets(std::string_view s);

bool is_space(std::string_view s, std::size_t pos);

std::string trim(std::string_view s);
std::string ascii_lower(std::string_view s);

// Lowercased alphanumeric runs; non-ASCII bytes are kept inside tokens.
std::vector<std::string> tokenize(std::string_view s);

std::uint64_t fnv1a(std::string_view s, std::uint64_t seed = 14695981039346656037ULL);
std::string hex64(std::uint64_t v);

// Round half away from zero to the given number of decimals, tolerant of
// binary representation error (4.945 -> 4.95).
double round_half_up(double value, int decimals);
std::string format_fixed(double value, int decimals);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace inspire::text
