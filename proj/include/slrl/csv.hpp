#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace slrl::csv {

/// Shortest decimal form that parses back to the same double.
std::string format(double value);

std::vector<std::string> split(std::string_view line, char sep = ',');

/// Parses a whole field; throws std::runtime_error naming `what` on junk.
double parse_double(std::string_view field, std::string_view what = "value");
long long parse_int(std::string_view field, std::string_view what = "value");

}  // namespace slrl::csv
