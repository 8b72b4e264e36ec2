#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace deeplin {

enum class ErrorCode {
  shape_mismatch,
  index_out_of_range,
  size_bound,
  non_finite,
  singular_input,
  no_real_root,
  not_positive_definite,
  not_symmetric,
  not_orthogonal,
  numeric_failure,
  invalid_config,
  io,
};

const char* to_string(ErrorCode code);

// Single exception type for the library. The code decides how callers
// (notably the CLI) classify the failure.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what,
        std::optional<double> condition = std::nullopt)
      : std::runtime_error(what), code_(code), condition_(condition) {}

  ErrorCode code() const noexcept { return code_; }

  // Condition estimate of the offending input, when one was computed.
  std::optional<double> condition() const noexcept { return condition_; }

  bool is_numeric() const noexcept;
  bool is_config() const noexcept;

 private:
  ErrorCode code_;
  std::optional<double> condition_;
};

}  // namespace deeplin
