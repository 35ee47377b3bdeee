#pragma once

#include <stdexcept>
#include <string>

namespace arc {

// Distinct codes surface as process exit codes in the CLI.
enum class ErrorCode : int {
  kInvalidArgument = 2,
  kDimensionMismatch = 3,
  kIo = 4,
  kParse = 5,
  kUnknownEnum = 6,
  kPrecondition = 7,
  kDivergence = 8,
  kNumerical = 9,
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kDimensionMismatch: return "dimension_mismatch";
    case ErrorCode::kIo: return "io_error";
    case ErrorCode::kParse: return "parse_error";
    case ErrorCode::kUnknownEnum: return "unknown_enum";
    case ErrorCode::kPrecondition: return "precondition_violated";
    case ErrorCode::kDivergence: return "divergence";
    case ErrorCode::kNumerical: return "numerical_error";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) throw Error(code, what);
}

}  // namespace arc
