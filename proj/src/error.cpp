#include "harmgrad/error.hpp"

namespace harmgrad {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidInput: return "invalid-input";
    case ErrorKind::NonFinite: return "non-finite";
    case ErrorKind::GridTooLarge: return "grid-too-large";
    case ErrorKind::Degenerate: return "degenerate-denominator";
    case ErrorKind::AllZeroCoefficients: return "all-zero-coefficients";
    case ErrorKind::BoundaryRoot: return "boundary-root";
    case ErrorKind::NearContour: return "near-contour-root";
    case ErrorKind::QuadratureFailure: return "quadrature-failure";
    case ErrorKind::BudgetViolated: return "budget-violated";
    case ErrorKind::Resolution: return "resolution";
    case ErrorKind::DegenerateMetric: return "degenerate-metric";
    case ErrorKind::UnpaddedSupport: return "unpadded-support";
    case ErrorKind::NoConvergence: return "no-convergence";
    case ErrorKind::StencilUnstable: return "stencil-unstable";
    case ErrorKind::MaskOverlap: return "mask-overlap";
    case ErrorKind::ZeroMismatch: return "zero-location-mismatch";
    case ErrorKind::Normalization: return "normalization";
    case ErrorKind::ConfigInvalid: return "config-invalid";
  }
  return "unknown";
}

}  // namespace harmgrad
