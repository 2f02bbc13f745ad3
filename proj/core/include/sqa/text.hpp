#pragma once

#include <string>
#include <string_view>

namespace sqa {

// Shortest decimal text that parses back to the identical double.
std::string format_exact(double value);

// Decimal text with `digits` significant digits ("%.{digits}g").
std::string format_significant(double value, int digits);

// Strict parse of a full string as a double; throws FormatError naming `what`.
double parse_double(std::string_view text, std::string_view what);

long long parse_integer(std::string_view text, std::string_view what);

}  // namespace sqa
