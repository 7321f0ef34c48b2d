#pragma once

#include <cmath>
#include <cstdio>
#include <string>

namespace sfg {

/// Scientific notation with 17 significant digits, '.' decimal; "nan" for missing values.
inline std::string fmt_sci(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

}  // namespace sfg
