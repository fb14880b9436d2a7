#pragma once

#include <stdexcept>
#include <string>

namespace tanfem {

enum class ErrorCode {
  invalid_argument,
  dimension_mismatch,
  domain_error,          // division by zero value, sqrt derivative singularity, ...
  singular_matrix,
  linear_breakdown,      // GMRES stagnation / breakdown
  not_converged,
  parse_error,
  io_error,
  invalid_mesh,
  internal,
};

const char* error_code_name(ErrorCode c) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline const char* error_code_name(ErrorCode c) noexcept {
  switch (c) {
    case ErrorCode::invalid_argument:   return "invalid_argument";
    case ErrorCode::dimension_mismatch: return "dimension_mismatch";
    case ErrorCode::domain_error:       return "domain_error";
    case ErrorCode::singular_matrix:    return "singular_matrix";
    case ErrorCode::linear_breakdown:   return "linear_breakdown";
    case ErrorCode::not_converged:      return "not_converged";
    case ErrorCode::parse_error:        return "parse_error";
    case ErrorCode::io_error:           return "io_error";
    case ErrorCode::invalid_mesh:       return "invalid_mesh";
    case ErrorCode::internal:           return "internal";
  }
  return "unknown";
}

[[noreturn]] inline void raise(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace tanfem
