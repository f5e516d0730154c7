#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace rcg::textio {

// 17 significant digits round-trips every finite double; hex floats
// ("%a") are accepted by parse_double as well.
std::string format_double(double v, bool hex = false);
// Shortest decimal that reads back to the same double.
std::string format_shortest(double v);
std::string join(const std::vector<double>& values, bool hex = false);

double parse_double(std::string_view token, std::string_view context);
long long parse_int(std::string_view token, std::string_view context);
std::vector<std::string> split_ws(std::string_view line);
std::vector<double> parse_doubles(std::string_view line, std::string_view context);
std::string trim(std::string_view s);

}  // namespace rcg::textio
