#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cogsr {

// 64-bit FNV-1a. Used for config fingerprints and normalization-stats ids;
// stable across platforms and runs.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ull);
std::uint64_t fnv1a64(std::span<const double> values, std::uint64_t seed = 0xcbf29ce484222325ull);
std::string to_hex(std::uint64_t v);

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);
std::vector<std::string> split_whitespace(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Shortest round-trip decimal form of a double ("%.17g").
std::string format_double(double v);

}  // namespace cogsr
