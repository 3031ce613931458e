#pragma once

#include <stdexcept>
#include <string>

namespace encopt {

enum class ErrorCode {
  invalid_dimension,
  dimension_mismatch,
  not_hermitian,
  not_trace_preserving,
  not_isometry,
  not_rank_one,
  malformed_choi,
  inconsistency,
  out_of_range,
  precondition,
  conditioning,
  degenerate_input,
  schema,
  size_limit,
  unknown_name,
};

const char* to_string(ErrorCode code) noexcept;

/// Exception thrown by every library entry point. The code identifies the
/// violated contract; what() carries the details (values, dimensions).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_dimension: return "invalid dimension";
    case ErrorCode::dimension_mismatch: return "dimension mismatch";
    case ErrorCode::not_hermitian: return "not Hermitian";
    case ErrorCode::not_trace_preserving: return "not trace preserving";
    case ErrorCode::not_isometry: return "not an isometry";
    case ErrorCode::not_rank_one: return "not rank one";
    case ErrorCode::malformed_choi: return "malformed Choi matrix";
    case ErrorCode::inconsistency: return "inconsistency";
    case ErrorCode::out_of_range: return "out of range";
    case ErrorCode::precondition: return "precondition violated";
    case ErrorCode::conditioning: return "ill conditioned";
    case ErrorCode::degenerate_input: return "degenerate input";
    case ErrorCode::schema: return "schema error";
    case ErrorCode::size_limit: return "size limit exceeded";
    case ErrorCode::unknown_name: return "unknown name";
  }
  return "error";
}

}  // namespace encopt
