#pragma once

#include "harmgrad/grid.hpp"

namespace harmgrad {

// Fourier convention: fhat(xi) = int f(x) exp(-2 pi i x.xi) dx with xi = xi_1 + i xi_2.
// Under it d/dzbar -> pi i xi and d/dz -> pi i conj(xi), so
//   Cauchy   C f = (1/pi) int f(w) / (z - w) dA(w)  -> 1 / (pi i xi)    (0 at xi = 0)
//   Beurling S f = d/dz C f                          -> conj(xi) / xi   (1 at xi = 0)
// Oracles: C chi_D = conj(z) inside, 1/z outside; S chi_D = 0 inside, -1/z^2 outside.

/// Periodic box size relative to the input grid, per axis.
inline constexpr std::size_t kSpectralPadding = 2;

/// Border values above this fraction of max |f| count as support.
inline constexpr double kSupportTolerance = 1e-12;

struct TransformOptions {
  /// Move the mass of f into a Gaussian at the grid centre handled in closed form.
  bool far_field_correction = true;
  /// Return the whole periodic box instead of the input window.
  bool padded_output = false;
};

/// Both throw ErrorKind::UnpaddedSupport if f is supported on the grid border.
ComplexGridField cauchy_transform(const ComplexGridField& f, TransformOptions opts = {});
ComplexGridField beurling_transform(const ComplexGridField& f, TransformOptions opts = {});

/// Central differences inside, one-sided on the border.
ComplexGridField dz_fd(const ComplexGridField& f);
ComplexGridField dzbar_fd(const ComplexGridField& f);

/// Zero-pads f into the periodic box used by the transforms.
ComplexGridField pad_to_box(const ComplexGridField& f);

}  // namespace harmgrad
