#include "parstable/csv.hpp"

#include <charconv>
#include <cmath>

#include "parstable/errors.hpp"

namespace parstable {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    const auto end = pos == std::string_view::npos ? line.size() : pos;
    out.emplace_back(trim(line.substr(start, end - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_csv_double(std::string_view field) {
  field = trim(field);
  if (field.empty()) throw DataError("missing value in CSV");
  if (field.front() == '+') field.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size() || !std::isfinite(v)) {
    throw DataError("not a finite number in CSV: '" + std::string(field) + "'");
  }
  return v;
}

}  // namespace parstable
