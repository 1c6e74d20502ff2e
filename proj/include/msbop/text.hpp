#ifndef MSBOP_TEXT_HPP
#define MSBOP_TEXT_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace msbop {

// Decimal with 9 significant digits; the
// format every text artifact uses.
std::string format_real(double value);

std::vector<std::string> split(std::string_view text, char sep);
std::string_view trim(std::string_view text);

// Whole-token parse; nullopt on trailing garbage, empty input or overflow.
std::optional<double> parse_real(std::string_view token);
std::optional<long long> parse_integer(std::string_view token);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

// 64-bit FNV-1a; used for config hashes stamped into artifact headers.
std::uint64_t fnv1a(std::string_view bytes);
std::string hex64(std::uint64_t value);

}  // namespace msbop

#endif
