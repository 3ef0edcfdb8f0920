#pragma once

#include <charconv>
#include <string>

namespace deskrl {

/// Shortest round-trip decimal form of a double. Used everywhere an
/// artifact is written so reruns are byte-identical.
inline std::string fmt_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace deskrl
