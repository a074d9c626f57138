#include "pcs/error.hpp"

namespace pcs {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::dimension_overflow: return "dimension_overflow";
    case ErrorCode::basis_mismatch: return "basis_mismatch";
    case ErrorCode::cutoff_too_small: return "cutoff_too_small";
    case ErrorCode::not_antihermitian: return "not_antihermitian";
    case ErrorCode::not_block_diagonal: return "not_block_diagonal";
    case ErrorCode::unnormalized_state: return "unnormalized_state";
    case ErrorCode::invalid_density: return "invalid_density";
    case ErrorCode::path_not_closed: return "path_not_closed";
    case ErrorCode::invalid_path: return "invalid_path";
    case ErrorCode::pole_contact: return "pole_contact";
    case ErrorCode::under_sampled: return "under_sampled";
    case ErrorCode::insufficient_grid: return "insufficient_grid";
    case ErrorCode::schema: return "schema";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

bool is_numeric_failure(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument:
    case ErrorCode::schema:
    case ErrorCode::io:
      return false;
    default:
      return true;
  }
}

}  // namespace pcs
