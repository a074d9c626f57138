#pragma once

#include <stdexcept>
#include <string>

namespace pcs {

/// Failure categories. The CLI maps schema-type errors to exit code 2 and
/// numeric failures to exit code 3.
enum class ErrorCode {
  invalid_argument,
  dimension_overflow,
  basis_mismatch,
  cutoff_too_small,
  not_antihermitian,
  not_block_diagonal,
  unnormalized_state,
  invalid_density,
  path_not_closed,
  invalid_path,
  pole_contact,
  under_sampled,
  insufficient_grid,
  schema,
  io,
};

const char* to_string(ErrorCode code);

/// True for failures raised by the numerics (as opposed to bad input shape).
bool is_numeric_failure(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace pcs
