#pragma once

// Locale-independent number formatting for every text file the library
// writes.

#include <charconv>
#include <cmath>
#include <string>
#include <string_view>
#include <system_error>

#include "mdrf/errors.hpp"

namespace mdrf {

/// Shortest decimal form that parses back to the same double.
inline std::string format_real(double v) {
  if (!std::isfinite(v)) throw NumericError("refusing to format a non-finite value");
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

/// Strict parse of a whole field; `what` names it in the error.
inline double parse_real(std::string_view s, const std::string& what) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  if (b != e && *b == '+') ++b;
  const auto r = std::from_chars(b, e, v);
  if (r.ec != std::errc() || r.ptr != e || s.empty()) throw InvalidArgument(what + ": '" + std::string(s) + "' is not a number");
  if (!std::isfinite(v)) throw InvalidArgument(what + ": non-finite value");
  return v;
}

}  // namespace mdrf
