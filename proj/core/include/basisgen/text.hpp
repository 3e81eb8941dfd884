#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace basisgen {

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);
double parse_double(std::string_view text);
std::uint64_t parse_u64(std::string_view text);

std::vector<std::string> split(std::string_view text, char sep);

/// 64-bit FNV-1a. Used for config hashes, not for security.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t value);

/// Reads `key=value` lines. Blank lines and lines starting with '#' are skipped.
std::map<std::string, std::string> parse_key_values(std::string_view text);
std::string format_key_values(const std::map<std::string, std::string>& entries);

}  // namespace basisgen
