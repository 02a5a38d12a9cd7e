#pragma once

#include <charconv>
#include <string>
#include <system_error>

namespace tessel {

/// Shortest decimal text that parses back to exactly `value`.
inline std::string format_double(double value) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) return "nan";
  return std::string(buf, end);
}

}  // namespace tessel
