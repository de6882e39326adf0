#include "harmgrad/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/special_functions/legendre.hpp>

namespace harmgrad {

GaussLegendre gauss_legendre(int n) {
  if (n < 1) throw Error(ErrorKind::InvalidInput, "Gauss-Legendre order must be >= 1");
  // boost returns the nonnegative zeros in increasing order
  const std::vector<double> pos = boost::math::legendre_p_zeros<double>(n);
  GaussLegendre gl;
  for (double x : pos) {
    const double dp = boost::math::legendre_p_prime(n, x);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    gl.nodes.push_back(x);
    gl.weights.push_back(w);
    if (x != 0.0) {
      gl.nodes.push_back(-x);
      gl.weights.push_back(w);
    }
  }
  return gl;
}

DiskRule::DiskRule(int quad_points)
    : DiskRule(static_cast<int>(std::ceil(std::sqrt(static_cast<double>(std::max(quad_points, 1))))),
               static_cast<int>(std::ceil(std::sqrt(static_cast<double>(std::max(quad_points, 1)))))) {}

DiskRule::DiskRule(int radial, int angular) : radial_(radial), angular_(angular) {
  if (radial < 1 || angular < 1) throw Error(ErrorKind::InvalidInput, "disk rule needs >= 1 node per axis");
  const GaussLegendre gl = gauss_legendre(radial);
  nodes_.reserve(static_cast<std::size_t>(radial) * angular);
  log_weights_.reserve(nodes_.capacity());
  for (std::size_t k = 0; k < gl.nodes.size(); ++k) {
    // rho in [0,1]; weight of the rho*drho measure normalized to 1
    const double rho = 0.5 * (1.0 + gl.nodes[k]);
    const double w = gl.weights[k] * rho / static_cast<double>(angular);
    for (int a = 0; a < angular; ++a) {
      const double theta = 2.0 * std::numbers::pi * a / angular;
      nodes_.push_back(std::polar(rho, theta));
      log_weights_.push_back(std::log(w));
    }
  }
}

double log_sum_exp(std::span<const double> v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace harmgrad
