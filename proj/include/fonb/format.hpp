#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <string>

namespace fonb {

/// Locale-independent text for a double. Without a precision the shortest
/// text that round-trips is used.
inline std::string format_double(double v, int precision = 0) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  if (precision <= 0) {
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
  }
  std::snprintf(buf, sizeof buf, "%.*g", precision, v);
  return buf;
}

}  // namespace fonb
