#include "harmgrad/drift_elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <memory>
#include <ostream>
#include <tuple>

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "harmgrad/frequency.hpp"

namespace harmgrad {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool is_role(const MaskGrid& role, std::size_t i, std::size_t j, NodeRole r) {
  return role(i, j) == static_cast<std::uint8_t>(r);
}

bool interior(const MaskGrid& role, std::size_t i, std::size_t j) {
  return is_role(role, i, j, NodeRole::Interior);
}

}  // namespace

DriftSolution solve_drift(const DriftProblem& problem, double tol) {
  if (!(problem.kappa > 0.0) || !(problem.h > 0.0) || problem.h >= problem.kappa) {
    throw Error(ErrorKind::InvalidInput, "need 0 < h < kappa");
  }
  if (!problem.boundary) throw Error(ErrorKind::InvalidInput, "boundary data missing");
  const double h = problem.h;
  const auto m = static_cast<std::size_t>(std::ceil(problem.kappa / h)) + 1;
  const std::size_t n = 2 * m + 1;
  if (n * n > kDefaultMaxNodes) throw Error(ErrorKind::GridTooLarge, "drift grid too large");
  const cplx origin = -static_cast<double>(m) * h * cplx(1.0, 1.0);

  DriftSolution sol;
  sol.kappa = problem.kappa;
  sol.u = RealGridField(origin, h, n, n);
  sol.role = sol.u.like<std::uint8_t>();
  sol.bx = sol.u.like<double>();
  sol.by = sol.u.like<double>();

  std::vector<std::ptrdiff_t> index(n * n, -1);
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const cplx z = sol.u.node(i, j);
      if (std::abs(z) >= problem.kappa) continue;
      sol.role(i, j) = static_cast<std::uint8_t>(NodeRole::Interior);
      index[i * n + j] = static_cast<std::ptrdiff_t>(count++);
      if (problem.drift) {
        const auto [bx, by] = problem.drift(z);
        if (!std::isfinite(bx) || !std::isfinite(by)) throw Error(ErrorKind::NonFinite, "drift is not finite");
        sol.bx(i, j) = bx;
        sol.by(i, j) = by;
        sol.lambda = std::max(sol.lambda, std::hypot(bx, by));
      }
    }
  }
  sol.unknowns = count;
  if (h * sol.lambda >= 2.0) {
    throw Error(ErrorKind::StencilUnstable, "h * max|b| must stay below 2 for an M-matrix stencil");
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    for (std::size_t j = 1; j + 1 < n; ++j) {
      if (!interior(sol.role, i, j)) continue;
      const std::array<std::pair<std::size_t, std::size_t>, 4> nb{{{i + 1, j}, {i - 1, j}, {i, j + 1}, {i, j - 1}}};
      for (const auto& [p, q] : nb) {
        if (interior(sol.role, p, q) || is_role(sol.role, p, q, NodeRole::Dirichlet)) continue;
        sol.role(p, q) = static_cast<std::uint8_t>(NodeRole::Dirichlet);
        const double g = problem.boundary(sol.u.node(p, q));
        if (!std::isfinite(g)) throw Error(ErrorKind::NonFinite, "boundary data is not finite");
        sol.u(p, q) = g;
      }
    }
  }
  if (count == 0) return sol;

  // rows scaled by h^2
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(5 * count);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(count));
  for (std::size_t i = 1; i + 1 < n; ++i) {
    for (std::size_t j = 1; j + 1 < n; ++j) {
      const std::ptrdiff_t row = index[i * n + j];
      if (row < 0) continue;
      const double ax = 0.5 * h * sol.bx(i, j);
      const double ay = 0.5 * h * sol.by(i, j);
      trip.emplace_back(row, row, -4.0);
      const std::array<std::tuple<std::size_t, std::size_t, double>, 4> nb{
          {{i + 1, j, 1.0 + ax}, {i - 1, j, 1.0 - ax}, {i, j + 1, 1.0 + ay}, {i, j - 1, 1.0 - ay}}};
      for (const auto& [p, q, w] : nb) {
        const std::ptrdiff_t col = index[p * n + q];
        if (col >= 0) trip.emplace_back(row, col, w);
        else rhs[row] -= w * sol.u(p, q);
      }
    }
  }
  Eigen::SparseMatrix<double> A(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(count));
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();

  const double rhs_norm = rhs.norm();
  Eigen::VectorXd x = Eigen::VectorXd::Zero(rhs.size());
  if (rhs_norm > 0.0) {
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success) throw Error(ErrorKind::NoConvergence, "sparse LU factorization failed");
    x = lu.solve(rhs);
    sol.residual = (A * x - rhs).norm() / rhs_norm;
    for (int pass = 0; pass < 3 && !(sol.residual < tol); ++pass) {
      x += lu.solve(rhs - A * x);
      sol.residual = (A * x - rhs).norm() / rhs_norm;
    }
    if (!(sol.residual < tol)) {
      throw Error(ErrorKind::NoConvergence, "relative residual " + std::to_string(sol.residual) + " above tolerance");
    }
    for (int pass = 0; pass < problem.corrections; ++pass) {
      for (std::size_t k = 0; k < n * n; ++k) {
        if (index[k] >= 0) sol.u.values()[k] = x[index[k]];
      }
      Eigen::VectorXd src = rhs;
      auto known = [&](std::size_t p, std::size_t q) { return sol.role(p, q) != 0; };
      for (std::size_t i = 2; i + 2 < n; ++i) {
        for (std::size_t j = 2; j + 2 < n; ++j) {
          const std::ptrdiff_t row = index[i * n + j];
          if (row < 0 || !known(i + 2, j) || !known(i - 2, j) || !known(i, j + 2) || !known(i, j - 2)) continue;
          const auto& u = sol.u;
          const double d4x = u(i + 2, j) - 4 * u(i + 1, j) + 6 * u(i, j) - 4 * u(i - 1, j) + u(i - 2, j);
          const double d4y = u(i, j + 2) - 4 * u(i, j + 1) + 6 * u(i, j) - 4 * u(i, j - 1) + u(i, j - 2);
          const double d3x = 0.5 * (u(i + 2, j) - 2 * u(i + 1, j) + 2 * u(i - 1, j) - u(i - 2, j));
          const double d3y = 0.5 * (u(i, j + 2) - 2 * u(i, j + 1) + 2 * u(i, j - 1) - u(i, j - 2));
          src[row] += (d4x + d4y) / 12.0 + h * (sol.bx(i, j) * d3x + sol.by(i, j) * d3y) / 6.0;
        }
      }
      x = lu.solve(src);
    }
  }
  for (std::size_t k = 0; k < n * n; ++k) {
    if (index[k] >= 0) sol.u.values()[k] = x[index[k]];
  }
  return sol;
}

double max_error(const DriftSolution& sol, const ScalarFunction& exact) {
  double e = 0.0;
  for (std::size_t i = 0; i < sol.u.nx(); ++i)
    for (std::size_t j = 0; j < sol.u.ny(); ++j)
      if (interior(sol.role, i, j)) e = std::max(e, std::abs(sol.u(i, j) - exact(sol.u.node(i, j))));
  return e;
}

DiscreteGradient discrete_gradient(const DriftSolution& sol) {
  DiscreteGradient g{sol.u.like<double>(kNaN), sol.u.like<double>(kNaN)};
  const double h2 = 2.0 * sol.u.spacing();
  for (std::size_t i = 1; i + 1 < sol.u.nx(); ++i) {
    for (std::size_t j = 1; j + 1 < sol.u.ny(); ++j) {
      if (!interior(sol.role, i, j)) continue;
      g.ux(i, j) = (sol.u(i + 1, j) - sol.u(i - 1, j)) / h2;
      g.uy(i, j) = (sol.u(i, j + 1) - sol.u(i, j - 1)) / h2;
    }
  }
  return g;
}

namespace {

double gradient_max2(const DiscreteGradient& g) {
  double m = 0.0;
  for (std::size_t k = 0; k < g.ux.size(); ++k) {
    const double v = g.ux.values()[k] * g.ux.values()[k] + g.uy.values()[k] * g.uy.values()[k];
    if (std::isfinite(v)) m = std::max(m, v);
  }
  return m;
}

MaskGrid critical_mask(const DiscreteGradient& g) {
  MaskGrid mask = g.ux.like<std::uint8_t>();
  const double cut = kCriticalCutoff * gradient_max2(g);
  for (std::size_t k = 0; k < mask.size(); ++k) {
    const double v = g.ux.values()[k] * g.ux.values()[k] + g.uy.values()[k] * g.uy.values()[k];
    if (std::isfinite(v) && v <= cut) mask.values()[k] = 1;
  }
  return mask;
}

// counterclockwise ring of the 3x3 loop centred at (i, j)
constexpr std::array<std::array<int, 2>, 8> kRing{
    {{1, -1}, {1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}}};

struct LoopZero {
  int winding = 0;
  cplx position;
};

// winding of ux - i uy around the ring; false when the ring touches an undefined node or an exact zero
bool loop_winding(const DiscreteGradient& g, std::size_t i, std::size_t j, LoopZero& out) {
  const auto nx = static_cast<std::ptrdiff_t>(g.ux.nx());
  const auto ny = static_cast<std::ptrdiff_t>(g.ux.ny());
  std::array<cplx, 8> f{};
  for (std::size_t k = 0; k < 8; ++k) {
    const std::ptrdiff_t p = static_cast<std::ptrdiff_t>(i) + kRing[k][0];
    const std::ptrdiff_t q = static_cast<std::ptrdiff_t>(j) + kRing[k][1];
    if (p < 0 || q < 0 || p >= nx || q >= ny) return false;
    const double ux = g.ux(p, q);
    const double uy = g.uy(p, q);
    if (!std::isfinite(ux) || !std::isfinite(uy) || (ux == 0.0 && uy == 0.0)) return false;
    f[k] = cplx(ux, -uy);
  }
  if (!std::isfinite(g.ux(i, j))) return false;
  double turn = 0.0;
  for (std::size_t k = 0; k < 8; ++k) turn += std::arg(f[(k + 1) % 8] / f[k]);
  out.winding = static_cast<int>(std::lround(turn / (2.0 * std::numbers::pi)));
  out.position = g.ux.node(i, j);
  if (out.winding == 0) return true;

  // affine least squares fit of the gradient on the 9 nodes
  const double h = g.ux.spacing();
  Eigen::Matrix<double, 9, 3> M;
  Eigen::Matrix<double, 9, 2> Y;
  for (int k = 0; k < 9; ++k) {
    const int di = k < 8 ? kRing[k][0] : 0;
    const int dj = k < 8 ? kRing[k][1] : 0;
    M.row(k) << 1.0, di * h, dj * h;
    Y.row(k) << g.ux(i + di, j + dj), g.uy(i + di, j + dj);
  }
  const Eigen::Matrix<double, 3, 2> c = M.colPivHouseholderQr().solve(Y);
  Eigen::Matrix2d J;
  J << c(1, 0), c(2, 0), c(1, 1), c(2, 1);
  const Eigen::Vector2d g0(c(0, 0), c(0, 1));
  const double scale = J.cwiseAbs().maxCoeff();
  if (scale > 0.0 && std::abs(J.determinant()) > 1e-8 * scale * scale) {
    const Eigen::Vector2d d = -J.partialPivLu().solve(g0);
    if (std::abs(d[0]) <= h && std::abs(d[1]) <= h) out.position += cplx(d[0], d[1]);
  }
  return true;
}

}  // namespace

std::vector<Root> gradient_zeros(const DriftSolution& sol) {
  const DiscreteGradient g = discrete_gradient(sol);
  const std::size_t n = sol.u.nx();
  const std::size_t mid = n / 2;
  std::vector<Root> zeros;
  for (std::size_t i = 1 + (mid + 1) % 2; i + 1 < n; i += 2) {
    for (std::size_t j = 1 + (mid + 1) % 2; j + 1 < n; j += 2) {
      LoopZero z;
      if (!loop_winding(g, i, j, z) || z.winding == 0) continue;
      zeros.push_back({z.position, z.winding});
    }
  }
  return zeros;
}

GradientLogField gradient_log_field(const DriftSolution& sol, std::vector<Root> zeros) {
  const DiscreteGradient g = discrete_gradient(sol);
  GradientLogField out;
  out.critical = critical_mask(g);
  const std::size_t nx = sol.u.nx();
  const std::size_t ny = sol.u.ny();
  const std::vector<Root> detected = gradient_zeros(sol);
  if (zeros.empty()) {
    zeros = detected;
  } else {
    long supplied = 0;
    long found = 0;
    for (const Root& r : zeros)
      if (std::abs(r.position) < sol.kappa) supplied += r.multiplicity;
    for (const Root& r : detected) found += r.multiplicity;
    if (supplied != found) {
      throw Error(ErrorKind::ZeroMismatch, "supplied zeros carry multiplicity " + std::to_string(supplied) +
                                               " but the winding count is " + std::to_string(found));
    }
  }
  out.zeros = std::move(zeros);
  for (const Root& r : out.zeros) {
    const cplx t = (r.position - sol.u.origin()) / sol.u.spacing();
    const auto i = static_cast<std::ptrdiff_t>(std::lround(t.real()));
    const auto j = static_cast<std::ptrdiff_t>(std::lround(t.imag()));
    if (i >= 0 && j >= 0 && i < static_cast<std::ptrdiff_t>(nx) && j < static_cast<std::ptrdiff_t>(ny)) {
      out.critical(i, j) = 1;
    }
  }

  out.valid = sol.u.like<std::uint8_t>();
  for (std::size_t i = 1; i + 1 < nx; ++i) {
    for (std::size_t j = 1; j + 1 < ny; ++j) {
      if (!interior(sol.role, i, j) || !interior(sol.role, i + 1, j) || !interior(sol.role, i - 1, j) ||
          !interior(sol.role, i, j + 1) || !interior(sol.role, i, j - 1)) {
        continue;
      }
      out.valid(i, j) = 1;
    }
  }
  constexpr auto d = static_cast<std::ptrdiff_t>(kCriticalDilation);
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t j = 0; j < ny; ++j) {
      if (!out.critical(i, j)) continue;
      for (std::ptrdiff_t p = -d; p <= d; ++p) {
        for (std::ptrdiff_t q = -d; q <= d; ++q) {
          const std::ptrdiff_t a = static_cast<std::ptrdiff_t>(i) + p;
          const std::ptrdiff_t b = static_cast<std::ptrdiff_t>(j) + q;
          if (a >= 0 && b >= 0 && a < static_cast<std::ptrdiff_t>(nx) && b < static_cast<std::ptrdiff_t>(ny)) {
            out.valid(a, b) = 0;
          }
        }
      }
    }
  }

  out.phi = sol.u.like<double>(kNaN);
  out.psi = sol.u.like<double>(kNaN);
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t j = 0; j < ny; ++j) {
      if (!out.valid(i, j)) continue;
      const cplx z = sol.u.node(i, j);
      const double phi = std::log(g.ux(i, j) * g.ux(i, j) + g.uy(i, j) * g.uy(i, j));
      double logp = 0.0;
      for (const Root& r : out.zeros) logp += r.multiplicity * std::log(std::norm(z - r.position));
      if (!std::isfinite(logp) || !std::isfinite(phi)) {
        throw Error(ErrorKind::ZeroMismatch, "a zero sits on a node outside the critical mask");
      }
      out.phi(i, j) = phi;
      out.psi(i, j) = phi - logp;
      out.reassembly = std::max(out.reassembly, std::abs(phi - (logp + out.psi(i, j))));
    }
  }
  if (!(out.reassembly <= 1e-8)) throw Error(ErrorKind::ZeroMismatch, "phi does not reassemble from the zeros");
  return out;
}

double TestBump::value(cplx z) const {
  const double s = std::norm(z - center) / (radius * radius);
  return s < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - s)) : 0.0;
}

std::array<double, 2> TestBump::gradient(cplx z) const {
  const cplx w = z - center;
  const double s = std::norm(w) / (radius * radius);
  if (s >= 1.0) return {0.0, 0.0};
  const double f = -std::exp(1.0 - 1.0 / (1.0 - s)) / ((1.0 - s) * (1.0 - s)) * 2.0 / (radius * radius);
  return {f * w.real(), f * w.imag()};
}

namespace {

bool gradient_valid(const MaskGrid& valid, std::size_t i, std::size_t j) {
  return i > 0 && j > 0 && i + 1 < valid.nx() && j + 1 < valid.ny() && valid(i, j) && valid(i + 1, j) &&
         valid(i - 1, j) && valid(i, j + 1) && valid(i, j - 1);
}

// index range of nodes that can lie in the closed disk B_rho(c)
struct NodeBox {
  std::ptrdiff_t i0, i1, j0, j1;
};

NodeBox node_box(const RealGridField& f, cplx c, double rho) {
  const double h = f.spacing();
  const cplx o = f.origin();
  auto lo = [&](double v) { return static_cast<std::ptrdiff_t>(std::floor(v / h)); };
  auto hi = [&](double v) { return static_cast<std::ptrdiff_t>(std::ceil(v / h)); };
  return {lo(c.real() - rho - o.real()), hi(c.real() + rho - o.real()), lo(c.imag() - rho - o.imag()),
          hi(c.imag() + rho - o.imag())};
}

bool bump_clear(const MaskGrid& valid, const RealGridField& geom, const TestBump& b) {
  const NodeBox box = node_box(geom, b.center, b.radius);
  for (std::ptrdiff_t i = box.i0; i <= box.i1; ++i) {
    for (std::ptrdiff_t j = box.j0; j <= box.j1; ++j) {
      if (i < 0 || j < 0 || i >= static_cast<std::ptrdiff_t>(geom.nx()) || j >= static_cast<std::ptrdiff_t>(geom.ny())) {
        if (std::abs(geom.origin() + cplx(i * geom.spacing(), j * geom.spacing()) - b.center) < b.radius) return false;
        continue;
      }
      if (std::abs(geom.node(i, j) - b.center) >= b.radius) continue;
      if (!gradient_valid(valid, i, j)) return false;
    }
  }
  return true;
}

}  // namespace

double phi_weak_residual(const DriftSolution& sol, const GradientLogField& field, std::span<const TestBump> bank) {
  const DiscreteGradient g = discrete_gradient(sol);
  const double h = sol.u.spacing();
  double worst = 0.0;
  for (const TestBump& b : bank) {
    if (!bump_clear(field.valid, sol.u, b)) {
      throw Error(ErrorKind::MaskOverlap, "test function reaches the critical set or the boundary");
    }
    const NodeBox box = node_box(sol.u, b.center, b.radius);
    double sum = 0.0;
    for (std::ptrdiff_t i = std::max<std::ptrdiff_t>(box.i0, 1); i <= box.i1; ++i) {
      for (std::ptrdiff_t j = std::max<std::ptrdiff_t>(box.j0, 1); j <= box.j1; ++j) {
        const cplx z = sol.u.node(i, j);
        if (std::abs(z - b.center) >= b.radius) continue;
        const auto [ex, ey] = b.gradient(z);
        const double px = (field.phi(i + 1, j) - field.phi(i - 1, j)) / (2.0 * h);
        const double py = (field.phi(i, j + 1) - field.phi(i, j - 1)) / (2.0 * h);
        const double ux = g.ux(i, j);
        const double uy = g.uy(i, j);
        const double k = (sol.bx(i, j) * ux + sol.by(i, j) * uy) / (ux * ux + uy * uy);
        sum += (px + 2.0 * k * ux) * ex + (py + 2.0 * k * uy) * ey;
      }
    }
    worst = std::max(worst, std::abs(sum) * h * h);
  }
  return worst;
}

std::vector<TestBump> default_test_bank(const GradientLogField& field, double radius, double reach,
                                        double clearance) {
  std::vector<TestBump> bank;
  const auto k = static_cast<int>(std::floor(reach / radius));
  for (int a = -k; a <= k; ++a) {
    for (int b = -k; b <= k; ++b) {
      const TestBump t{cplx(a * radius, b * radius), radius};
      if (std::abs(t.center) + radius > reach) continue;
      const bool near_zero = std::any_of(field.zeros.begin(), field.zeros.end(), [&](const Root& r) {
        return std::abs(r.position - t.center) < radius + clearance;
      });
      if (!near_zero && bump_clear(field.valid, field.phi, t)) bank.push_back(t);
    }
  }
  return bank;
}

double dyadic_bmo(const RealGridField& gx, const RealGridField& gy, const MaskGrid& valid, double half_side,
                  std::size_t min_nodes) {
  if (!(half_side > 0.0)) throw Error(ErrorKind::InvalidInput, "square half side must be positive");
  const double h = gx.spacing();
  struct Sample {
    double x, y, gx, gy;
  };
  std::vector<Sample> pts;
  for (std::size_t i = 0; i < gx.nx(); ++i) {
    for (std::size_t j = 0; j < gx.ny(); ++j) {
      if (!valid(i, j) || !std::isfinite(gx(i, j)) || !std::isfinite(gy(i, j))) continue;
      const cplx z = gx.node(i, j);
      const double x = (z.real() + half_side) / (2.0 * half_side);
      const double y = (z.imag() + half_side) / (2.0 * half_side);
      if (x < 0.0 || y < 0.0 || x >= 1.0 || y >= 1.0) continue;
      pts.push_back({x, y, gx(i, j), gy(i, j)});
    }
  }
  double best = 0.0;
  for (std::size_t per = 1; 2.0 * half_side / static_cast<double>(per) >= 2.0 * h; per *= 2) {
    const std::size_t cells = per * per;
    std::vector<double> sx(cells, 0.0), sy(cells, 0.0), osc(cells, 0.0);
    std::vector<std::size_t> cnt(cells, 0);
    std::vector<std::size_t> cell_of(pts.size());
    for (std::size_t k = 0; k < pts.size(); ++k) {
      const auto a = static_cast<std::size_t>(pts[k].x * static_cast<double>(per));
      const auto b = static_cast<std::size_t>(pts[k].y * static_cast<double>(per));
      const std::size_t c = std::min(a, per - 1) * per + std::min(b, per - 1);
      cell_of[k] = c;
      sx[c] += pts[k].gx;
      sy[c] += pts[k].gy;
      ++cnt[c];
    }
    for (std::size_t c = 0; c < cells; ++c) {
      if (cnt[c] == 0) continue;
      sx[c] /= static_cast<double>(cnt[c]);
      sy[c] /= static_cast<double>(cnt[c]);
    }
    for (std::size_t k = 0; k < pts.size(); ++k) {
      const std::size_t c = cell_of[k];
      osc[c] += std::hypot(pts[k].gx - sx[c], pts[k].gy - sy[c]);
    }
    for (std::size_t c = 0; c < cells; ++c) {
      if (cnt[c] < min_nodes) continue;
      best = std::max(best, osc[c] / static_cast<double>(cnt[c]));
    }
  }
  return best;
}

PsiReport psi_report(const DriftSolution& sol, const GradientLogField& field, double budget, PsiOptions opts) {
  if (!(budget > 0.0)) throw Error(ErrorKind::InvalidInput, "budget must be positive");
  PsiReport rep;
  rep.budget = budget;
  const std::size_t nx = sol.u.nx();
  const std::size_t ny = sol.u.ny();
  const double h = sol.u.spacing();
  for (const Root& r : field.zeros) rep.zero_count += static_cast<std::size_t>(std::max(r.multiplicity, 0));

  RealGridField gx = sol.u.like<double>(kNaN);
  RealGridField gy = sol.u.like<double>(kNaN);
  std::vector<cplx> blocked;
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t j = 0; j < ny; ++j) {
      if (field.valid(i, j)) rep.max_abs_psi = std::max(rep.max_abs_psi, std::abs(field.psi(i, j)));
      else if (interior(sol.role, i, j)) blocked.push_back(sol.u.node(i, j));
      if (!gradient_valid(field.valid, i, j)) continue;
      gx(i, j) = (field.psi(i + 1, j) - field.psi(i - 1, j)) / (2.0 * h);
      gy(i, j) = (field.psi(i, j + 1) - field.psi(i, j - 1)) / (2.0 * h);
    }
  }
  rep.ratio = rep.max_abs_psi / budget;
  rep.bmo = dyadic_bmo(gx, gy, field.valid, 0.5 * sol.kappa / std::numbers::sqrt2);

  rep.scale = opts.c_epsilon / std::pow(budget, 1.0 + opts.epsilon);
  const double reach = 2.0 * rep.scale + 2.0 * h;
  const DiskRule rule(std::max(opts.quad_points, kMinQuadPoints));
  auto log_density = [&](cplx z) { return interpolate(field.psi, z); };
  const int s = std::max(opts.samples, 2);
  for (int a = 0; a < s; ++a) {
    for (int b = 0; b < s; ++b) {
      const double half = 0.5 * sol.kappa;
      const cplx x(-half + 2.0 * half * (a + 0.5) / s, -half + 2.0 * half * (b + 0.5) / s);
      if (std::abs(x) >= half) continue;
      if (std::abs(x) + reach >= sol.kappa - 2.0 * h) continue;
      bool clear = true;
      for (const cplx& p : blocked) {
        if (std::abs(p - x) <= reach) {
          clear = false;
          break;
        }
      }
      if (!clear) continue;
      const double nval = frequency_with(log_density, x, rep.scale, rule);
      rep.max_small_scale_n = std::max(rep.max_small_scale_n, nval);
      ++rep.sampled;
    }
  }
  rep.small_scale_ok = rep.max_small_scale_n <= opts.threshold;
  return rep;
}

LogDensity gradient_density(const DriftSolution& sol) {
  DiscreteGradient g = discrete_gradient(sol);
  auto gx = std::make_shared<RealGridField>(std::move(g.ux));
  auto gy = std::make_shared<RealGridField>(std::move(g.uy));
  return [gx, gy](cplx z) {
    const double a = interpolate(*gx, z);
    const double b = interpolate(*gy, z);
    return std::log(a * a + b * b);
  };
}

double measured_budget(const DriftSolution& sol, int quad_points) {
  return frequency_of(gradient_density(sol), 0.0, 0.25 * sol.kappa, DiskRule(std::max(quad_points, kMinQuadPoints)));
}

double appendix_identity_residual(double ux, double uy, double uxx, double uxy, double uyy) {
  const double v = ux * ux + uy * uy;
  const double hess2 = uxx * uxx + 2.0 * uxy * uxy + uyy * uyy;
  const double wx = uxx * ux + uxy * uy;
  const double wy = uxy * ux + uyy * uy;
  const double lap = uxx + uyy;
  const double lhs = 2.0 * v * hess2 - 4.0 * (wx * wx + wy * wy);
  const double rhs = -4.0 * lap * (wx * ux + wy * uy) + 2.0 * v * lap * lap;
  return lhs - rhs;
}

double appendix_identity_scale(double ux, double uy, double uxx, double uxy, double uyy) {
  const double v = ux * ux + uy * uy;
  const double hess2 = uxx * uxx + 2.0 * uxy * uxy + uyy * uyy;
  const double wx = uxx * ux + uxy * uy;
  const double wy = uxy * ux + uyy * uy;
  const double lap = uxx + uyy;
  return 2.0 * v * hess2 + 4.0 * (wx * wx + wy * wy) + 4.0 * std::abs(lap * (wx * ux + wy * uy)) +
         2.0 * v * lap * lap;
}

DriftProblem power_drift_problem(int lambda, double strength, double h, double kappa) {
  if (lambda < 0) throw Error(ErrorKind::InvalidInput, "lambda must be nonnegative");
  DriftProblem p;
  p.kappa = kappa;
  p.h = h;
  const int d = lambda + 1;
  p.boundary = [d](cplx z) { return std::pow(z, d).real() / d; };
  if (strength != 0.0) {
    p.drift = [strength](cplx z) {
      return std::array{strength * std::cos(std::numbers::pi * z.imag()), strength * std::sin(std::numbers::pi * z.real())};
    };
  }
  return p;
}

std::vector<DriftSuperlevelRow> drift_superlevel_experiment(std::span<const int> lambdas,
                                                            std::span<const double> strengths,
                                                            std::span<const double> rs, DriftSuperlevelOptions opts) {
  std::vector<DriftSuperlevelRow> rows;
  for (int lambda : lambdas) {
    for (double strength : strengths) {
      DriftSolution sol;
      std::string failure;
      try {
        DriftProblem problem = power_drift_problem(lambda, strength, opts.h);
        problem.corrections = opts.corrections;
        sol = solve_drift(problem);
      } catch (const Error& e) {
        failure = e.what();
      }
      const LogDensity density = failure.empty() ? gradient_density(sol) : LogDensity{};
      for (double r : rs) {
        DriftSuperlevelRow row;
        row.lambda = lambda;
        row.strength = strength;
        row.r = r;
        row.error = failure;
        if (failure.empty()) {
          try {
            row.scan = superlevel_volume(density, r, opts.threshold, opts.window, 0.0, {opts.quad_points, opts.jobs});
            row.area = row.scan.area;
            const double l = static_cast<double>(lambda);
            row.normalized = row.area / (std::pow(l, 2.0 + opts.epsilon) * r * r);
            row.harmonic_normalized = row.area / (l * l * r * r);
          } catch (const Error& e) {
            row.error = e.what();
          }
        }
        row.failed = !row.error.empty();
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

void write_drift_superlevel_csv_header(std::ostream& os) {
  os << "lambda,strength,r,threshold,h,area,normalized,harmonic_normalized,cells,hits,degenerate,status\n";
}

void write_drift_superlevel_csv_row(std::ostream& os, const DriftSuperlevelRow& row) {
  char buf[320];
  std::snprintf(buf, sizeof buf, "%d,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%zu,%zu,%zu,%s\n", row.lambda,
                row.strength, row.r, row.scan.threshold, row.scan.h, row.area, row.normalized,
                row.harmonic_normalized, row.scan.cells, row.scan.hits, row.scan.degenerate,
                row.failed ? "failed" : "ok");
  os << buf;
}

}  // namespace harmgrad
