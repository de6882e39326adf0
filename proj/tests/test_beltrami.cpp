#include <doctest.h>

#include <cmath>
#include <filesystem>

#include <Eigen/Dense>

#include "harmgrad/beltrami.hpp"
#include "harmgrad/spectral.hpp"

using namespace harmgrad;

namespace {

ComplexGridField radial_bump(double peak, double radius, cplx phase, double half_width, int n) {
  const double h = 2.0 * half_width / (n - 1);
  ComplexGridField mu({-half_width, -half_width}, h, n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      mu(i, j) = peak * phase * std::max(0.0, 1.0 - std::abs(mu.node(i, j)) / radius);
    }
  }
  return mu;
}

MetricField affine_metric(double L, double eta, int n) {
  const double half = 2.2 * eta;
  const double h = 2.0 * half / (n - 1);
  return sample_metric(
      [L](cplx z) { return std::array{1.0 + L * z.real(), L * (z.real() + z.imag()) / 4.0, 1.0 + L * z.imag() / 2.0}; },
      {-half, -half}, h, n, n);
}

}  // namespace

TEST_CASE("mu_from_metric examples") {
  auto single = [](double e, double f, double g) {
    const MetricField m = sample_metric([=](cplx) { return std::array{e, f, g}; }, 0.0, 1.0, 1, 1);
    return mu_from_metric(m)(0, 0);
  };
  CHECK(single(1.0, 0.0, 1.0) == cplx(0.0, 0.0));
  const double s = 0.2;
  const cplx a = single(1.0 + s, 0.0, 1.0);
  CHECK(a.real() == doctest::Approx(s / (2.0 + s + 2.0 * std::sqrt(1.0 + s))).epsilon(1e-14));
  CHECK(a.real() == doctest::Approx(0.0455).epsilon(0.01));
  CHECK(a.imag() == 0.0);
  const cplx b = single(1.0, 0.1, 1.0);
  CHECK(b.real() == 0.0);
  CHECK(b.imag() == doctest::Approx(0.2 / (2.0 + 2.0 * std::sqrt(0.99))).epsilon(1e-14));
  CHECK(b.imag() == doctest::Approx(0.0503).epsilon(0.01));

  CHECK_THROWS_AS(sample_metric([](cplx) { return std::array{1.0, 1.0, 1.0}; }, 0.0, 1.0, 2, 2), Error);
  MetricField bad = sample_metric([](cplx) { return std::array{1.0, 0.0, 1.0}; }, 0.0, 1.0, 2, 2);
  bad.F(1, 1) = 2.0;
  CHECK_THROWS_AS(mu_from_metric(bad), Error);

  // conformal metrics have zero dilatation
  const MetricField conf = sample_metric(
      [](cplx z) {
        const double w = std::exp(2.0 * std::sin(3.0 * z.real()) * z.imag());
        return std::array{w, 0.0, w};
      },
      {-1.0, -1.0}, 0.1, 21, 21);
  CHECK(max_abs(mu_from_metric(conf)) == 0.0);
}

TEST_CASE("sample_metric measures its constants") {
  const MetricField m = affine_metric(1.0, 0.1, 45);
  CHECK(m.lambda_ellipticity >= 1.0);
  CHECK(m.lambda_ellipticity < 1.5);
  CHECK(m.lambda_lipschitz > 0.5);
  CHECK(m.lambda_lipschitz < 1.5);
}

TEST_CASE("extend_mu examples") {
  const double eta = 0.25;
  const ComplexGridField zero({-1.0, -1.0}, 0.02, 101, 101);
  CHECK(max_abs(extend_mu(zero, eta).mu) == 0.0);

  const cplx c(0.1, -0.05);
  const ComplexGridField flat({-1.0, -1.0}, 0.02, 101, 101, c);
  const ExtendedMu ext = extend_mu(flat, eta);
  for (std::size_t i = 0; i < ext.mu.nx(); ++i) {
    for (std::size_t j = 0; j < ext.mu.ny(); ++j) {
      const double r = std::abs(ext.mu.node(i, j));
      const cplx want = r < eta ? c : (r < 2 * eta ? c * (2.0 - r / eta) : cplx(0.0));
      CHECK(std::abs(ext.mu(i, j) - want) < 1e-14);
    }
  }

  const ComplexGridField bump = radial_bump(0.3, 0.2, {0.6, 0.8}, 1.0, 101);
  const ExtendedMu eb = extend_mu(bump, eta);
  CHECK(eb.sup_extended <= eb.sup_inner + 1e-15);
  for (std::size_t i = 0; i < eb.mu.nx(); ++i)
    for (std::size_t j = 0; j < eb.mu.ny(); ++j)
      if (std::abs(eb.mu.node(i, j)) >= 2 * eta) CHECK(eb.mu(i, j) == cplx(0.0));
  CHECK(eb.lipschitz_extended <= eb.lipschitz_inner * 1.05 + eb.sup_inner / eta);
}

TEST_CASE("solve_beltrami examples") {
  const ComplexGridField zero({-1.0, -1.0}, 2.0 / 63, 64, 64);
  const BeltramiSolution triv = solve_beltrami(zero);
  CHECK(triv.neumann_iters == 0);
  CHECK(triv.residual == 0.0);
  for (std::size_t i = 0; i < zero.nx(); ++i)
    for (std::size_t j = 0; j < zero.ny(); ++j) CHECK(triv.omega(i, j) == zero.node(i, j));

  const ComplexGridField mu = radial_bump(0.05, 0.5, {0.0, 1.0}, 1.0, 128);
  const BeltramiSolution sol = solve_beltrami(mu);
  CHECK(sol.residual < 1e-6);
  CHECK(sol.neumann_iters <= 6);
  CHECK(sol.consistency < 1e-2);
  CHECK(sol.fd_residual < 1e-2);

  const ComplexGridField big = radial_bump(0.999, 0.5, 1.0, 1.0, 64);
  try {
    solve_beltrami(big, {1e-8, 5, 0.9995});
    FAIL("expected no-convergence");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NoConvergence);
  }
  CHECK_THROWS_AS(solve_beltrami(big), Error);
}

TEST_CASE("differential_check") {
  const ComplexGridField zero({-1.0, -1.0}, 2.0 / 63, 64, 64);
  const EigenReport one = differential_check(solve_beltrami(zero), 0.5);
  CHECK(one.min_modulus == 1.0);
  CHECK(one.max_modulus == 1.0);
  CHECK(one.within_bounds());

  const ComplexGridField small = radial_bump(0.05, 0.5, {0.6, 0.8}, 1.0, 96);
  const BeltramiSolution s = solve_beltrami(small);
  const EigenReport rs = differential_check(s, 0.25);
  CHECK(rs.nodes > 0);
  CHECK(rs.within_bounds());
  CHECK(rs.min_modulus >= 0.5);
  CHECK(rs.max_modulus <= 2.0);

  // the closed form agrees with eigenvalues of the real 2x2 differential
  for (std::size_t k = 0; k < s.sigma.size(); k += 997) {
    const cplx a = std::exp(s.sigma.values()[k]);
    const cplx b = s.mu.values()[k] * a;
    Eigen::Matrix2d J;
    J << (a + b).real(), (b - a).imag(), (a + b).imag(), (a - b).real();
    const auto ev = J.eigenvalues();
    const cplx root = std::sqrt(cplx(a.real() * a.real() + (std::norm(s.mu.values()[k]) - 1.0) * std::norm(a), 0.0));
    const double m1 = std::abs(a.real() + root);
    const double m2 = std::abs(a.real() - root);
    const double e1 = std::abs(ev[0]);
    const double e2 = std::abs(ev[1]);
    CHECK(std::min(m1, m2) == doctest::Approx(std::min(e1, e2)).epsilon(1e-10));
    CHECK(std::max(m1, m2) == doctest::Approx(std::max(e1, e2)).epsilon(1e-10));
  }

  const ComplexGridField large = radial_bump(0.9, 0.5, 1.0, 1.0, 64);
  const EigenReport rl = differential_check(solve_beltrami(large, {1e-8, 400, 0.95}), 0.5);
  CHECK_FALSE(rl.within_bounds());
  CHECK(rl.min_modulus < 0.5);
}

TEST_CASE("isothermal coordinates are harmonic for the metric") {
  const double eta = 0.2;
  const int n = 256;
  const MetricField g = affine_metric(1.0, eta, n);
  const ExtendedMu ext = extend_mu(mu_from_metric(g), eta);
  const BeltramiSolution sol = solve_beltrami(ext.mu);
  const double h = g.E.spacing();
  // div(A grad u) with A = [[G, -F], [-F, E]] / sqrt(EG - F^2), flux form
  auto residual = [&](auto&& u) {
    double worst = 0.0;
    for (int i = 2; i + 2 < n; ++i) {
      for (int j = 2; j + 2 < n; ++j) {
        if (std::abs(g.E.node(i, j)) >= 0.8 * eta) continue;
        auto A = [&](int p, int q) {
          const double e = g.E(p, q), f = g.F(p, q), gg = g.G(p, q);
          const double s = std::sqrt(e * gg - f * f);
          return std::array{gg / s, -f / s, e / s};
        };
        auto flux = [&](int p, int q) {
          const double ux = (u(p + 1, q) - u(p - 1, q)) / (2 * h);
          const double uy = (u(p, q + 1) - u(p, q - 1)) / (2 * h);
          const auto a = A(p, q);
          return std::pair{a[0] * ux + a[1] * uy, a[1] * ux + a[2] * uy};
        };
        const double div = (flux(i + 1, j).first - flux(i - 1, j).first) / (2 * h) +
                           (flux(i, j + 1).second - flux(i, j - 1).second) / (2 * h);
        worst = std::max(worst, std::abs(div));
      }
    }
    return worst;
  };
  const double re = residual([&](int p, int q) { return sol.omega(p, q).real(); });
  const double im = residual([&](int p, int q) { return sol.omega(p, q).imag(); });
  const double x = residual([&](int p, int q) { return g.E.node(p, q).real(); });
  const double y = residual([&](int p, int q) { return g.E.node(p, q).imag(); });
  MESSAGE("Laplace-Beltrami residuals: Re " << re << " Im " << im << " vs x " << x << " y " << y);
  CHECK(re < 0.05 * x);
  CHECK(im < 0.05 * y);
}

TEST_CASE("grid binary round trip") {
  const ComplexGridField mu = radial_bump(0.2, 0.5, {0.6, 0.8}, 1.0, 33);
  const auto stem = std::filesystem::temp_directory_path() / "harmgrad_grid_roundtrip";
  write_grid(mu, stem);
  const ComplexGridField back = read_grid(stem);
  CHECK(back.nx() == mu.nx());
  CHECK(back.ny() == mu.ny());
  CHECK(back.spacing() == mu.spacing());
  CHECK(back.origin() == mu.origin());
  for (std::size_t k = 0; k < mu.size(); ++k) CHECK(back.values()[k] == mu.values()[k]);
  CHECK(std::filesystem::file_size(stem.string() + ".bin") == mu.size() * 16);
  std::filesystem::remove(stem.string() + ".bin");
  std::filesystem::remove(stem.string() + ".json");
}
