#pragma once

// Decimal serialization shared by the dataset and checkpoint formats.
// Values are written with 17 significant digits, which round-trips every
// IEEE-754 double exactly.

#include <charconv>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hamlearn/errors.hpp"

namespace hamlearn::textio {

inline void append_double(std::string& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  out.append(buf, res.ptr);
}

inline void append_doubles(std::string& out, std::span<const double> values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out.push_back(' ');
    append_double(out, values[i]);
  }
}

/// Whitespace-separated doubles; throws FormatError on any malformed token.
inline std::vector<double> parse_doubles(std::string_view line) {
  std::vector<double> out;
  const char* p = line.data();
  const char* end = p + line.size();
  while (true) {
    while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
    if (p == end) break;
    double v = 0.0;
    const auto res = std::from_chars(p, end, v);
    if (res.ec != std::errc() ||
        (res.ptr != end && *res.ptr != ' ' && *res.ptr != '\t' && *res.ptr != '\r')) {
      throw FormatError("malformed number near '" +
                        std::string(p, static_cast<std::size_t>(std::min<std::ptrdiff_t>(end - p, 24))) +
                        "'");
    }
    out.push_back(v);
    p = res.ptr;
  }
  return out;
}

}  // namespace hamlearn::textio
