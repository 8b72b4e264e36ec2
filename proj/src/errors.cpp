#include "deeplin/errors.hpp"

namespace deeplin {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::shape_mismatch: return "shape_mismatch";
    case ErrorCode::index_out_of_range: return "index_out_of_range";
    case ErrorCode::size_bound: return "size_bound";
    case ErrorCode::non_finite: return "non_finite";
    case ErrorCode::singular_input: return "singular_input";
    case ErrorCode::no_real_root: return "no_real_root";
    case ErrorCode::not_positive_definite: return "not_positive_definite";
    case ErrorCode::not_symmetric: return "not_symmetric";
    case ErrorCode::not_orthogonal: return "not_orthogonal";
    case ErrorCode::numeric_failure: return "numeric_failure";
    case ErrorCode::invalid_config: return "invalid_config";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

bool Error::is_numeric() const noexcept {
  switch (code_) {
    case ErrorCode::non_finite:
    case ErrorCode::singular_input:
    case ErrorCode::no_real_root:
    case ErrorCode::not_positive_definite:
    case ErrorCode::numeric_failure:
      return true;
    default:
      return false;
  }
}

bool Error::is_config() const noexcept {
  return code_ == ErrorCode::invalid_config || code_ == ErrorCode::io;
}

}  // namespace deeplin
