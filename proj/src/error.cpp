#include "rankseg/error.hpp"

namespace rankseg {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::io: return "io";
    case ErrorCode::format: return "format";
    case ErrorCode::dtype: return "dtype";
    case ErrorCode::out_of_range: return "out_of_range";
    case ErrorCode::simplex: return "simplex";
    case ErrorCode::shape_mismatch: return "shape_mismatch";
    case ErrorCode::cap_exceeded: return "cap_exceeded";
    case ErrorCode::unstable: return "unstable";
    case ErrorCode::invalid_argument: return "invalid_argument";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(message), code_(code) {}

}  // namespace rankseg
