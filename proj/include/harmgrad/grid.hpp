#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "harmgrad/error.hpp"

namespace harmgrad {

using cplx = std::complex<double>;

/// Upper bound on the number of nodes any sampled grid may hold.
inline constexpr std::size_t kDefaultMaxNodes = std::size_t{1} << 26;

/// Samples on a uniform rectangular grid. Node (i, j) sits at
/// origin + i*h + 1i*j*h; storage is row-major in i, i.e. index i*ny + j.
template <class T>
class GridField {
 public:
  GridField() = default;

  GridField(cplx origin, double h, std::size_t nx, std::size_t ny, T fill = T{})
      : origin_(origin), h_(h), nx_(nx), ny_(ny), values_(nx * ny, fill) {
    check_shape();
  }

  GridField(cplx origin, double h, std::size_t nx, std::size_t ny, std::vector<T> values)
      : origin_(origin), h_(h), nx_(nx), ny_(ny), values_(std::move(values)) {
    check_shape();
    if (values_.size() != nx_ * ny_) {
      throw Error(ErrorKind::InvalidInput, "grid value count does not match nx*ny");
    }
  }

  cplx origin() const noexcept { return origin_; }
  double spacing() const noexcept { return h_; }
  std::size_t nx() const noexcept { return nx_; }
  std::size_t ny() const noexcept { return ny_; }
  std::size_t size() const noexcept { return values_.size(); }

  cplx node(std::size_t i, std::size_t j) const noexcept {
    return origin_ + cplx(static_cast<double>(i) * h_, static_cast<double>(j) * h_);
  }

  T& operator()(std::size_t i, std::size_t j) noexcept { return values_[i * ny_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const noexcept { return values_[i * ny_ + j]; }

  std::span<T> values() noexcept { return values_; }
  std::span<const T> values() const noexcept { return values_; }

  /// Same geometry, new contents.
  template <class U>
  GridField<U> like(U fill = U{}) const {
    return GridField<U>(origin_, h_, nx_, ny_, fill);
  }

 private:
  void check_shape() const {
    if (!(h_ > 0.0) || nx_ == 0 || ny_ == 0) {
      throw Error(ErrorKind::InvalidInput, "grid needs h > 0 and nx, ny >= 1");
    }
  }

  cplx origin_{0.0, 0.0};
  double h_ = 1.0;
  std::size_t nx_ = 0;
  std::size_t ny_ = 0;
  std::vector<T> values_;
};

using ComplexGridField = GridField<cplx>;
using RealGridField = GridField<double>;
using MaskGrid = GridField<std::uint8_t>;

double max_abs(const ComplexGridField& f);
bool all_finite(const ComplexGridField& f);

/// Discrete L2 norm sqrt(sum |f|^2 h^2).
double l2_norm(const ComplexGridField& f);

/// Bilinear interpolation; points outside the grid clamp to the border cell.
cplx interpolate(const ComplexGridField& f, cplx z);
double interpolate(const RealGridField& f, cplx z);

/// Writes `<stem>.bin` (row-major, little-endian float64 re/im pairs) and
/// `<stem>.json` with {"origin":[re,im],"h":..,"nx":..,"ny":..}.
void write_grid(const ComplexGridField& f, const std::filesystem::path& stem);
ComplexGridField read_grid(const std::filesystem::path& stem);

}  // namespace harmgrad
