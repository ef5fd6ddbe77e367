#ifndef FEWBODY_NUMFMT_HPP
#define FEWBODY_NUMFMT_HPP

#include <charconv>
#include <cstdio>
#include <string>

namespace fewbody {

// Locale-independent double formatting (shortest round-trip form).
inline std::string fmt_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  (void)ec;
  return std::string(buf, ptr);
}

// Fixed-precision general format, still locale-independent.
inline std::string fmt_double(double x, int precision) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x,
                                 std::chars_format::general, precision);
  (void)ec;
  return std::string(buf, ptr);
}

// RFC-4180 field quoting: only quotes when the field needs it.
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

} // namespace fewbody

#endif
