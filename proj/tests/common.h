#pragma once

#include <cmath>
#include <cstdio>
#include <string>

namespace testing
{
  // Round to two significant digits, the precision of the printed tables.
  inline double
  two_digits(double x)
  {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1e", x);
    return std::stod(buf);
  }

  inline bool
  same_two_digits(double value, double printed)
  {
    return std::abs(two_digits(value) - printed) <= 1e-9 * std::abs(printed);
  }
} // namespace testing
