#pragma once

#include <stdexcept>
#include <string>

namespace impgraph {

/// Failure categories. The CLI maps them onto its exit codes.
enum class ErrorKind {
  kUsage,      // bad arguments or configuration
  kMismatch,   // data/config/weights disagree on shapes
  kNumerical,  // non-finite loss or gradient
  kIo,         // unreadable, unwritable or malformed files
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace impgraph
