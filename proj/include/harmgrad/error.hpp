#pragma once

#include <stdexcept>
#include <string>

namespace harmgrad {

enum class ErrorKind {
  InvalidInput,
  NonFinite,
  GridTooLarge,
  Degenerate,
  AllZeroCoefficients,
  BoundaryRoot,
  NearContour,
  QuadratureFailure,
  BudgetViolated,
  Resolution,
  DegenerateMetric,
  UnpaddedSupport,
  NoConvergence,
  StencilUnstable,
  MaskOverlap,
  ZeroMismatch,
  Normalization,
  ConfigInvalid,
};

const char* to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace harmgrad
