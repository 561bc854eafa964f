#pragma once

#include <cstdio>
#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>
#include <type_traits>

namespace cosmoqm::csv {

/// Round-trippable decimal form: 17 significant digits, '.' separator.
inline std::string format(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string format(long long x) { return std::to_string(x); }
inline std::string format(unsigned long long x) { return std::to_string(x); }
inline std::string format(unsigned long x) { return std::to_string(x); }
inline std::string format(long x) { return std::to_string(x); }
inline std::string format(int x) { return std::to_string(x); }
inline std::string format(unsigned x) { return std::to_string(x); }

/// Writes one row; every line ends in '\n' regardless of platform.
template <typename... Fields>
void write_row(std::ostream& out, const Fields&... fields) {
  bool first = true;
  auto emit = [&](const auto& field) {
    if (!first) out << ',';
    first = false;
    if constexpr (std::is_convertible_v<decltype(field), std::string_view>) {
      out << std::string_view(field);
    } else {
      out << format(field);
    }
  };
  (emit(fields), ...);
  out << '\n';
}

inline void write_header(std::ostream& out, std::initializer_list<std::string_view> names) {
  bool first = true;
  for (auto name : names) {
    if (!first) out << ',';
    first = false;
    out << name;
  }
  out << '\n';
}

}  // namespace cosmoqm::csv
