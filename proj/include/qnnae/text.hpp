// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Locale-independent number formatting and small string helpers.
namespace qnnae::text {

/// Shortest representation that parses back to the same double.
std::string format_double(double value);

/// Fixed notation with `precision` digits after the point.
std::string format_fixed(double value, int precision);

/// Whole-string parse; nullopt on any trailing garbage. Accepts a leading '+'.
std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_integer(std::string_view s);

std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char delimiter);

}  // namespace qnnae::text
