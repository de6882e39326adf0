#pragma once

#include <cmath>
#include <iosfwd>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "harmgrad/harmonic_core.hpp"
#include "harmgrad/quadrature.hpp"

namespace harmgrad {

/// Smallest quad_points accepted by frequency_ball.
inline constexpr int kMinQuadPoints = 64;

/// log2 of the ratio of means of exp(log_f) over B_2r(x) and B_r(x).
/// Throws ErrorKind::Degenerate if the inner mean vanishes.
template <class LogF>
double frequency_with(LogF&& log_f, cplx x, double r, const DiskRule& rule) {
  if (!(r > 0.0)) throw Error(ErrorKind::InvalidInput, "frequency scale must be positive");
  const double inner = log_disk_average_of(log_f, x, r, rule);
  if (!std::isfinite(inner)) {
    throw Error(ErrorKind::Degenerate, "mean over the inner disk vanishes");
  }
  const double outer = log_disk_average_of(log_f, x, 2.0 * r, rule);
  return (outer - inner) / std::numbers::ln2;
}

double frequency_of(const LogDensity& log_f, cplx x, double r, const DiskRule& rule);

/// N(x, r) = log2(mean_{B_2r(x)} |F|^2 / mean_{B_r(x)} |F|^2) by polar quadrature.
double frequency_ball(const HoloField& field, cplx x, double r, int quad_points = 1024);
double frequency_ball(const HoloField& field, cplx x, double r, const DiskRule& rule);

/// Closed form log2(sum 4^{d-1} d a_d^2 r^{2d} / sum d a_d^2 r^{2d}).
double frequency_series(const SeriesRep& rep, double r);

struct SupInfOptions {
  int radial = 48;
  int angular = 96;
};

/// log2(sup_{B_2r(x)} |F|^2 / inf_{B_r(x)} |F|^2) on a polar sample that
/// includes the center and the boundary circles.
double frequency_supinf(const HoloField& field, cplx x, double r, SupInfOptions opts = {});

struct MonotonicityViolation {
  std::size_t index = 0;  // pair (index, index + 1) of r_grid
  double r_lo = 0.0;
  double r_hi = 0.0;
  double n_lo = 0.0;
  double n_hi = 0.0;
};

/// Adjacent scale pairs where N(r_{k+1}) < N(r_k) - tol.
std::vector<MonotonicityViolation> monotonicity_scan(const SeriesRep& rep,
                                                     std::span<const double> r_grid,
                                                     double tol = 1e-9);

/// The holomorphic gradient of the series: F(z) = sum_d d a_d (z - c)^{d-1}.
/// Low-order vanishing is kept as an exact root at the center; remaining
/// roots come from the companion-matrix eigenvalues.
HoloField series_to_field(const SeriesRep& rep);

enum class FrequencyMethod { Quadrature, Series, SupInf };

std::string to_string(FrequencyMethod m);

struct FrequencyProfile {
  std::vector<cplx> centers;
  std::vector<double> scales;
  std::vector<double> values;  // centers.size() x scales.size(), row-major
  FrequencyMethod method = FrequencyMethod::Quadrature;
  int quad_points = 0;

  double at(std::size_t center, std::size_t scale) const {
    return values[center * scales.size() + scale];
  }
};

FrequencyProfile frequency_profile(const HoloField& field, std::span<const cplx> centers,
                                   std::span<const double> scales, FrequencyMethod method,
                                   int quad_points = 1024);
FrequencyProfile frequency_profile(const SeriesRep& rep, std::span<const double> scales);

/// CSV with columns center_re,center_im,scale,N,method.
void write_csv(const FrequencyProfile& profile, std::ostream& os);

}  // namespace harmgrad
