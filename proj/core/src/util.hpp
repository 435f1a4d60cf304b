#pragma once

#include <charconv>
#include <cmath>
#include <string>

namespace socdispatch::detail {

// Shortest round-trip decimal representation.
inline std::string fmt(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

// Like fmt, but always carries a decimal point so CSV cells read as reals.
inline std::string fmt_decimal(double v) {
  std::string s = fmt(v);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

}  // namespace socdispatch::detail
