#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace powertrace {

// Shortest decimal text that parses back to exactly the same double.
std::string format_shortest(double value);

// Fixed-point text with `digits` decimals; "-0.000" is normalized to "0.000".
std::string format_fixed(double value, int digits);

std::optional<double> parse_double(std::string_view text);
std::optional<long long> parse_int(std::string_view text);

std::string_view trim(std::string_view text);

}  // namespace powertrace
