#pragma once

#include <charconv>
#include <ostream>
#include <string>
#include <string_view>

namespace pcs {

/// 17 significant digits, enough to round-trip any double.
inline std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

/// RFC-4180 field: quoted only when it contains a separator, quote or newline.
inline std::string csv_field(std::string_view text) {
  if (text.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(text);
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline void csv_end_row(std::ostream& out) { out << "\r\n"; }

}  // namespace pcs
