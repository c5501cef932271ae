#pragma once

#include <cstdarg>
#include <cstdio>
#include <string>

namespace mra::acceptance {

inline std::string format(const char* fmt, ...) {
  char buffer[512];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buffer, sizeof(buffer), fmt, args);
  va_end(args);
  return buffer;
}

}  // namespace mra::acceptance
