#pragma once

#include <stdexcept>
#include <string>

namespace itl {

/// Broad failure classes. The CLI maps each one to a stable exit code.
enum class ErrorKind {
  invalid_input,   // bad arguments, schema violations, shape mismatches
  io,              // missing or unwritable files
  divergence,      // non-finite values during training
  incompatible,    // checkpoint / dataset layout mismatch
  check_failed,    // a verification (e.g. gradient check) did not pass
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error invalid_input(const std::string& what) { return Error(ErrorKind::invalid_input, what); }

inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::check_failed: return 1;
    case ErrorKind::invalid_input: return 2;
    case ErrorKind::io: return 3;
    case ErrorKind::divergence: return 4;
    case ErrorKind::incompatible: return 5;
  }
  return 1;
}

}  // namespace itl
