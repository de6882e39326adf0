#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <functional>
#include <span>
#include <vector>

#include "harmgrad/grid.hpp"

namespace harmgrad {

struct GaussLegendre {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;  // sum to 2
};

GaussLegendre gauss_legendre(int n);

/// Tensor polar rule for averages over a disk: Gauss-Legendre in the radius
/// (weighted by rho) times a uniform angular rule. Nodes are stored for the
/// unit disk; weights sum to one, so the rule returns the mean directly.
class DiskRule {
 public:
  /// Splits quad_points evenly: radial = angular = ceil(sqrt(quad_points)).
  explicit DiskRule(int quad_points);
  DiskRule(int radial, int angular);

  int radial() const noexcept { return radial_; }
  int angular() const noexcept { return angular_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  std::span<const cplx> nodes() const noexcept { return nodes_; }
  std::span<const double> log_weights() const noexcept { return log_weights_; }

 private:
  int radial_;
  int angular_;
  std::vector<cplx> nodes_;
  std::vector<double> log_weights_;
};

/// log f as a function of position; -inf marks exact zeros of f.
using LogDensity = std::function<double(cplx)>;

/// Streaming log-sum-exp accumulator.
class LogSumExp {
 public:
  void add(double x) noexcept {
    if (x == -std::numeric_limits<double>::infinity()) return;
    if (x > max_) {
      sum_ = sum_ * std::exp(max_ - x) + 1.0;
      max_ = x;
    } else {
      sum_ += std::exp(x - max_);
    }
  }
  double value() const noexcept {
    return sum_ > 0.0 ? max_ + std::log(sum_) : -std::numeric_limits<double>::infinity();
  }

 private:
  double max_ = -std::numeric_limits<double>::infinity();
  double sum_ = 0.0;
};

/// log of the mean of f over the disk B_radius(center), computed stably in
/// the log domain. Returns -inf when f vanishes at every node.
template <class LogF>
double log_disk_average_of(LogF&& log_f, cplx center, double radius, const DiskRule& rule) {
  const auto nodes = rule.nodes();
  const auto lw = rule.log_weights();
  LogSumExp acc;
  for (std::size_t k = 0; k < nodes.size(); ++k) acc.add(lw[k] + log_f(center + radius * nodes[k]));
  return acc.value();
}

inline double log_disk_average(const LogDensity& log_f, cplx center, double radius,
                               const DiskRule& rule) {
  return log_disk_average_of(log_f, center, radius, rule);
}

/// log(sum exp(v)); -inf for an empty or all -inf input.
double log_sum_exp(std::span<const double> v);

}  // namespace harmgrad
