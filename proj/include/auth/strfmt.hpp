#pragma once

#include <charconv>
#include <string>

namespace auth {

// Shortest decimal form that round-trips to the same double. Keeps CSV and
// JSON output byte-stable across platforms and reruns.
inline void append_double(std::string& out, double value) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, res.ptr);
}

inline std::string format_double(double value) {
  std::string s;
  append_double(s, value);
  return s;
}

}  // namespace auth
