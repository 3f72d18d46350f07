#pragma once

#include <stdexcept>
#include <string>

namespace starcut {

/// Broad failure class; maps onto CLI exit codes (input = 2, computation = 3, protocol = 4).
enum class ErrorKind { input, computation, protocol };

/// Every library failure is reported as an Error carrying a stable, machine-parsable
/// reason code such as "seed-out-of-bounds" or "format-error".
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string reason, const std::string& detail)
      : std::runtime_error(reason + ": " + detail), kind_(kind), reason_(std::move(reason)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  ErrorKind kind_;
  std::string reason_;
};

inline Error input_error(std::string reason, const std::string& detail) {
  return Error(ErrorKind::input, std::move(reason), detail);
}

inline Error compute_error(std::string reason, const std::string& detail) {
  return Error(ErrorKind::computation, std::move(reason), detail);
}

inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::input: return 2;
    case ErrorKind::computation: return 3;
    case ErrorKind::protocol: return 4;
  }
  return 3;
}

}  // namespace starcut
