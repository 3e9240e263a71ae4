#pragma once

#include <cstdio>
#include <string>

namespace mwcons::detail {

/// Shortest text form that round-trips a double exactly.
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string fmtg(double v, int digits) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

}  // namespace mwcons::detail
