#pragma once

#include <stdexcept>
#include <string>

namespace rankseg {

enum class ErrorCode {
  io,
  format,
  dtype,
  out_of_range,
  simplex,
  shape_mismatch,
  cap_exceeded,
  unstable,
  invalid_argument,
};

const char* to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries a code so that callers
/// (CLI exit status, bindings) can map it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace rankseg
