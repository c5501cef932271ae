#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mra {

enum class ErrorKind {
  geometry,
  validation,
  numeric,
  state,
  io,
  corrupt_data,
  corrupt_checkpoint,
  version,
  schema,
  config,
  usage,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::geometry: return "geometry";
    case ErrorKind::validation: return "validation";
    case ErrorKind::numeric: return "numeric";
    case ErrorKind::state: return "state";
    case ErrorKind::io: return "io";
    case ErrorKind::corrupt_data: return "corrupt_data";
    case ErrorKind::corrupt_checkpoint: return "corrupt_checkpoint";
    case ErrorKind::version: return "version";
    case ErrorKind::schema: return "schema";
    case ErrorKind::config: return "config";
    case ErrorKind::usage: return "usage";
  }
  return "unknown";
}

/// Every failure surfaced by the library carries a kind so the CLI can
/// report it as a single machine-parsable line.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace mra
