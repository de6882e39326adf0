#include "harmgrad/beltrami.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "harmgrad/spectral.hpp"

namespace harmgrad {

namespace {

struct Eig {
  double lo;
  double hi;
};

Eig symmetric_eigs(double e, double f, double g) {
  const double mean = 0.5 * (e + g);
  const double rad = std::hypot(0.5 * (e - g), f);
  return {mean - rad, mean + rad};
}

}  // namespace

MetricField sample_metric(const MetricFunction& g, cplx origin, double h, std::size_t nx, std::size_t ny) {
  MetricField m{RealGridField(origin, h, nx, ny), RealGridField(origin, h, nx, ny), RealGridField(origin, h, nx, ny)};
  double ell = 1.0;
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t j = 0; j < ny; ++j) {
      const auto [e, f, gg] = g(m.E.node(i, j));
      if (!std::isfinite(e) || !std::isfinite(f) || !std::isfinite(gg)) {
        throw Error(ErrorKind::NonFinite, "metric component is not finite");
      }
      const Eig ev = symmetric_eigs(e, f, gg);
      if (!(ev.lo > 0.0)) throw Error(ErrorKind::DegenerateMetric, "metric is not positive definite");
      ell = std::max({ell, ev.hi, 1.0 / ev.lo});
      m.E(i, j) = e;
      m.F(i, j) = f;
      m.G(i, j) = gg;
    }
  }
  double lip = 0.0;
  auto edge = [&](std::size_t i0, std::size_t j0, std::size_t i1, std::size_t j1) {
    const Eig d = symmetric_eigs(m.E(i1, j1) - m.E(i0, j0), m.F(i1, j1) - m.F(i0, j0), m.G(i1, j1) - m.G(i0, j0));
    lip = std::max(lip, std::max(std::abs(d.lo), std::abs(d.hi)) / h);
  };
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t j = 0; j < ny; ++j) {
      if (i + 1 < nx) edge(i, j, i + 1, j);
      if (j + 1 < ny) edge(i, j, i, j + 1);
    }
  }
  m.lambda_ellipticity = ell;
  m.lambda_lipschitz = lip;
  return m;
}

ComplexGridField mu_from_metric(const MetricField& metric) {
  ComplexGridField mu(metric.E.origin(), metric.E.spacing(), metric.E.nx(), metric.E.ny());
  for (std::size_t i = 0; i < mu.nx(); ++i) {
    for (std::size_t j = 0; j < mu.ny(); ++j) {
      const double e = metric.E(i, j);
      const double f = metric.F(i, j);
      const double g = metric.G(i, j);
      const double det = e * g - f * f;
      if (!(det > 0.0) || !(e > 0.0)) throw Error(ErrorKind::DegenerateMetric, "EG - F^2 <= 0");
      mu(i, j) = cplx(e - g, 2.0 * f) / (e + g + 2.0 * std::sqrt(det));
    }
  }
  return mu;
}

double discrete_lipschitz(const ComplexGridField& f, double radius) {
  const double h = f.spacing();
  auto keep = [&](std::size_t i, std::size_t j) { return radius <= 0.0 || std::abs(f.node(i, j)) < radius; };
  double lip = 0.0;
  for (std::size_t i = 0; i < f.nx(); ++i) {
    for (std::size_t j = 0; j < f.ny(); ++j) {
      if (!keep(i, j)) continue;
      if (i + 1 < f.nx() && keep(i + 1, j)) lip = std::max(lip, std::abs(f(i + 1, j) - f(i, j)) / h);
      if (j + 1 < f.ny() && keep(i, j + 1)) lip = std::max(lip, std::abs(f(i, j + 1) - f(i, j)) / h);
    }
  }
  return lip;
}

ExtendedMu extend_mu(const ComplexGridField& mu, double eta) {
  if (!(eta > 0.0)) throw Error(ErrorKind::InvalidInput, "eta must be positive");
  ExtendedMu out{mu.like<cplx>()};
  for (std::size_t i = 0; i < mu.nx(); ++i) {
    for (std::size_t j = 0; j < mu.ny(); ++j) {
      const cplx z = mu.node(i, j);
      const double r = std::abs(z);
      if (r < eta) {
        out.mu(i, j) = mu(i, j);
        out.sup_inner = std::max(out.sup_inner, std::abs(mu(i, j)));
      } else if (r < 2.0 * eta) {
        out.mu(i, j) = interpolate(mu, z * (eta / r)) * (2.0 - r / eta);
      }
      out.sup_extended = std::max(out.sup_extended, std::abs(out.mu(i, j)));
    }
  }
  out.lipschitz_inner = discrete_lipschitz(mu, eta);
  out.lipschitz_extended = discrete_lipschitz(out.mu);
  return out;
}

namespace {

struct NeumannResult {
  ComplexGridField h;
  int iters = 0;
};

// h = rhs + mu S h by fixed-point iteration
NeumannResult neumann(const ComplexGridField& mu, const ComplexGridField& rhs, const BeltramiOptions& opts) {
  NeumannResult r{rhs, 0};
  const double scale = l2_norm(rhs);
  if (scale == 0.0) return r;
  for (int k = 1; k <= opts.max_iters; ++k) {
    const ComplexGridField s = beurling_transform(r.h);
    ComplexGridField next = rhs;
    double change = 0.0;
    for (std::size_t n = 0; n < next.size(); ++n) {
      next.values()[n] += mu.values()[n] * s.values()[n];
      change += std::norm(next.values()[n] - r.h.values()[n]);
    }
    change = std::sqrt(change) * mu.spacing();
    r.h = std::move(next);
    r.iters = k;
    if (change < opts.tol * scale) return r;
  }
  throw Error(ErrorKind::NoConvergence, "Neumann series did not converge in " + std::to_string(opts.max_iters) +
                                            " iterations");
}

}  // namespace

BeltramiSolution solve_beltrami(const ComplexGridField& mu, BeltramiOptions opts) {
  if (!(opts.mu_max > 0.0 && opts.mu_max < 1.0)) throw Error(ErrorKind::InvalidInput, "mu_max must lie in (0, 1)");
  if (!all_finite(mu)) throw Error(ErrorKind::NonFinite, "mu has non-finite values");
  if (max_abs(mu) > opts.mu_max) throw Error(ErrorKind::InvalidInput, "sup |mu| exceeds mu_max");

  BeltramiSolution sol;
  sol.mu = mu;
  const NeumannResult hw = neumann(mu, mu, opts);
  const NeumannResult hs = neumann(mu, dz_fd(mu), opts);
  sol.neumann_iters = std::max(hw.iters, hs.iters);

  const ComplexGridField c_w = cauchy_transform(hw.h);
  const ComplexGridField s_w = beurling_transform(hw.h);
  sol.sigma = cauchy_transform(hs.h);
  sol.omega = mu.like<cplx>();
  sol.dz_omega = mu.like<cplx>();
  for (std::size_t i = 0; i < mu.nx(); ++i) {
    for (std::size_t j = 0; j < mu.ny(); ++j) {
      sol.omega(i, j) = mu.node(i, j) + c_w(i, j);
      sol.dz_omega(i, j) = 1.0 + s_w(i, j);
      sol.residual = std::max(sol.residual, std::abs(hw.h(i, j) - mu(i, j) * sol.dz_omega(i, j)));
      sol.sigma_sup = std::max(sol.sigma_sup, std::abs(sol.sigma(i, j)));
      if (mu(i, j) != cplx(0.0, 0.0)) {
        sol.consistency = std::max(sol.consistency, std::abs(std::exp(sol.sigma(i, j)) - sol.dz_omega(i, j)));
      }
    }
  }
  const ComplexGridField dbar = dzbar_fd(sol.omega);
  const ComplexGridField dz = dz_fd(sol.omega);
  for (std::size_t i = 1; i + 1 < mu.nx(); ++i) {
    for (std::size_t j = 1; j + 1 < mu.ny(); ++j) {
      sol.fd_residual = std::max(sol.fd_residual, std::abs(dbar(i, j) - mu(i, j) * dz(i, j)));
    }
  }
  return sol;
}

EigenReport differential_check(const BeltramiSolution& sol, double eta) {
  EigenReport rep;
  rep.min_modulus = std::numeric_limits<double>::infinity();
  rep.max_modulus = 0.0;
  for (std::size_t i = 0; i < sol.sigma.nx(); ++i) {
    for (std::size_t j = 0; j < sol.sigma.ny(); ++j) {
      if (std::abs(sol.sigma.node(i, j)) >= eta) continue;
      const cplx a = std::exp(sol.sigma(i, j));
      const double m2 = std::norm(sol.mu(i, j));
      const cplx root = std::sqrt(cplx(a.real() * a.real() + (m2 - 1.0) * std::norm(a), 0.0));
      bool flagged = false;
      for (const cplx ev : {a.real() + root, a.real() - root}) {
        const double mod = std::abs(ev);
        rep.min_modulus = std::min(rep.min_modulus, mod);
        rep.max_modulus = std::max(rep.max_modulus, mod);
        if (mod < 0.5 || mod > 2.0) flagged = true;
      }
      ++rep.nodes;
      if (flagged) ++rep.flagged;
    }
  }
  if (rep.nodes == 0) {
    rep.min_modulus = 1.0;
    rep.max_modulus = 1.0;
  }
  return rep;
}

}  // namespace harmgrad
