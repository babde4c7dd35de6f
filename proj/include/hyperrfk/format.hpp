#pragma once

#include <cstdio>
#include <string>

namespace hyperrfk {

/// Shortest round-trip-safe text for a double ("%.17g").
inline std::string fmt_double(double x, int digits = 17) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

}  // namespace hyperrfk
