#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace citegraph {

// Shortest decimal text that survives a round trip, fixed across runs.
std::string format_number(double value);
std::vector<std::string> split_csv_line(std::string_view line);
double parse_number(std::string_view text);

}  // namespace citegraph
