#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace solartb {

/// Shortest decimal string that parses back to exactly `value`.
std::string format_number(double value);

/// Strict parse of a full decimal / scientific literal (no trailing junk).
bool parse_double(std::string_view text, double& out);
bool parse_u64(std::string_view text, std::uint64_t& out);

/// 64-bit FNV-1a, used for stable config fingerprints.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

}  // namespace solartb
