#pragma once

#include <stdexcept>
#include <string>

namespace rcg {

enum class ErrorCode {
  InvalidArgument = 1,
  Parse = 2,
  Validation = 3,
  Io = 4,
  DimensionMismatch = 5,
  Runtime = 6,
};

// Single exception type for the core; the C API maps `code()` onto its
// status values.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool ok, const std::string& what) {
  if (!ok) fail(ErrorCode::InvalidArgument, what);
}

}  // namespace rcg
