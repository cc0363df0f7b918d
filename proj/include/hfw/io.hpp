#pragma once

#include <charconv>
#include <cmath>
#include <ostream>
#include <string>

namespace hfw {

// Shortest round-trip representation; stable across runs on one platform.
inline std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

template <class... Ts>
void csv_row(std::ostream& os, const Ts&... xs) {
  bool first = true;
  auto put = [&](const auto& x) {
    if (!first) os << ',';
    first = false;
    if constexpr (std::is_floating_point_v<std::decay_t<decltype(x)>>)
      os << num(x);
    else
      os << x;
  };
  (put(xs), ...);
  os << '\n';
}

}  // namespace hfw
