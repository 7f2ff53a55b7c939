#pragma once

#include <array>
#include <charconv>
#include <string>

namespace parstable {

/// Shortest decimal text that parses back to exactly `x`.
inline std::string format_double(double x) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

}  // namespace parstable
