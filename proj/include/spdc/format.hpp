#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace spdc {

// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

// Strict parse of a whole field; throws ConfigError naming `what`.
double parse_double(std::string_view text, std::string_view what);

// Splits one CSV line on commas. Fields may be wrapped in double quotes.
std::vector<std::string> split_csv_line(std::string_view line);

// Quotes a CSV field when it contains a comma, quote or newline.
std::string csv_field(std::string_view text);

}  // namespace spdc
