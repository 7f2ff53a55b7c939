#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace parstable {

/// Splits one comma-separated record; surrounding whitespace and a trailing
/// '\r' are dropped from each field. Quoting is not supported.
std::vector<std::string> split_csv_line(std::string_view line);

/// Strict decimal parse of a whole field. Throws DataError.
double parse_csv_double(std::string_view field);

}  // namespace parstable
