#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace qp {

enum class ErrorCode {
  SingularMatrix,
  RankDeficientInput,
  DimensionMismatch,
  DuplicateQuasimonomial,
  NonPositiveState,
  Overflow,
  NotFound,
  NotSameClass,
  NotNonRedundant,
  NotApplicable,
  OrbitEscaped,
  ParseError,
  Internal,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what,
        std::optional<std::size_t> step = std::nullopt)
      : std::runtime_error(what), code_(code), step_(step) {}

  ErrorCode code() const noexcept { return code_; }

  /// Iteration index at which a dynamical error occurred, when known.
  std::optional<std::size_t> step() const noexcept { return step_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> step_;
};

}  // namespace qp
