#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace promptroute::core {

// Shortest decimal that round-trips to the same double.
std::string shortest(double v);
// Whole-string finite decimal; surrounding spaces not accepted.
std::optional<double> parse_number(std::string_view s);

// Splits one CSV line. Fields may be double-quoted with "" escapes; no
// embedded newlines.
std::vector<std::string> split_csv_line(std::string_view line);
// Quotes a field when it holds a comma, quote or leading/trailing space.
std::string csv_field(std::string_view s);

}  // namespace promptroute::core
