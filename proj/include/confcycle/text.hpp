#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace confcycle::text {

/// Shortest decimal form that parses back to the identical double.
/// Infinities print as `inf` / `-inf`, NaN as `nan`.
std::string format_double(double v);

/// Accepts anything std::from_chars accepts (including `inf`), with optional
/// leading '+'. The whole string must be consumed.
std::optional<double> parse_double(std::string_view s);
std::optional<std::int64_t> parse_int(std::string_view s);
std::optional<std::uint64_t> parse_uint(std::string_view s);

std::string_view trim(std::string_view s);

} // namespace confcycle::text
