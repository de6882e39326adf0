#pragma once

#include <array>
#include <functional>

#include "harmgrad/grid.hpp"

namespace harmgrad {

/// Symmetric metric [[E, F], [F, G]] sampled on a grid.
struct MetricField {
  RealGridField E;
  RealGridField F;
  RealGridField G;
  double lambda_ellipticity = 1.0;  // eigenvalues in [1/lambda, lambda]
  double lambda_lipschitz = 0.0;    // max |g(x) - g(y)| / |x - y| over adjacent nodes
};

using MetricFunction = std::function<std::array<double, 3>(cplx)>;

/// Samples (E, F, G) and measures both constants.
/// Throws ErrorKind::DegenerateMetric unless every node is positive definite.
MetricField sample_metric(const MetricFunction& g, cplx origin, double h, std::size_t nx, std::size_t ny);

/// mu = (E - G + 2iF) / (E + G + 2 sqrt(EG - F^2)).
ComplexGridField mu_from_metric(const MetricField& metric);

struct ExtendedMu {
  ComplexGridField mu;
  double sup_inner = 0.0;
  double sup_extended = 0.0;
  double lipschitz_inner = 0.0;
  double lipschitz_extended = 0.0;
};

/// Keeps mu on B_eta, ramps the boundary values linearly to zero along rays
/// across B_2eta \ B_eta, and is zero outside.
ExtendedMu extend_mu(const ComplexGridField& mu, double eta);

/// Max |f(p) - f(q)| / h over horizontally and vertically adjacent nodes with
/// both ends inside the disk of the given radius (all nodes if radius <= 0).
double discrete_lipschitz(const ComplexGridField& f, double radius = 0.0);

struct BeltramiOptions {
  double tol = 1e-8;  // relative L2 change between Neumann iterates
  int max_iters = 200;
  double mu_max = 0.5;
};

/// omega = z + C h_w with h_w = (I - mu S)^{-1} mu, so that dbar omega = mu dz omega;
/// sigma = C h_s with h_s = (I - mu S)^{-1} dz mu, so that dz omega = exp(sigma).
struct BeltramiSolution {
  ComplexGridField mu;
  ComplexGridField sigma;
  ComplexGridField omega;
  ComplexGridField dz_omega;  // 1 + S h_w
  int neumann_iters = 0;
  double residual = 0.0;      // max |dbar omega - mu dz omega|
  double fd_residual = 0.0;   // the same from finite differences of omega, interior nodes
  double consistency = 0.0;   // max |exp(sigma) - dz omega| over supp mu
  double sigma_sup = 0.0;
};

BeltramiSolution solve_beltrami(const ComplexGridField& mu, BeltramiOptions opts = {});

struct EigenReport {
  double min_modulus = 1.0;
  double max_modulus = 1.0;
  std::size_t nodes = 0;
  std::size_t flagged = 0;  // modulus outside [1/2, 2]

  bool within_bounds() const noexcept { return flagged == 0; }
};

/// Eigenvalues Re(e^s) +- (Re(e^s)^2 + (|mu|^2 - 1)|e^{2s}|)^{1/2} of the
/// differential of omega, over nodes of B_eta.
EigenReport differential_check(const BeltramiSolution& sol, double eta);

}  // namespace harmgrad
