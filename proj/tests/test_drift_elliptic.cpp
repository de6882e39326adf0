#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <boost/math/special_functions/bessel.hpp>

#include "harmgrad/drift_elliptic.hpp"
#include "harmgrad/quadrature.hpp"

using namespace harmgrad;

namespace {

DriftProblem exponential_problem(double k, double h) {
  DriftProblem p;
  p.h = h;
  p.drift = [k](cplx) { return std::array{k, 0.0}; };
  p.boundary = [k](cplx z) { return std::exp(-k * z.real()); };
  return p;
}

DriftProblem harmonic_problem(ScalarFunction g, double h) {
  DriftProblem p;
  p.h = h;
  p.boundary = std::move(g);
  return p;
}

std::vector<double> errors_over(const std::function<DriftProblem(double)>& make, std::initializer_list<int> ns) {
  std::vector<double> e;
  for (int n : ns) {
    const DriftProblem p = make(1.0 / n);
    e.push_back(max_error(solve_drift(p), p.boundary));
  }
  return e;
}

// log2 of the mean of exp(-2 k x) over B_2r and B_r
double exponential_frequency(double k, double r) {
  using boost::math::cyl_bessel_i;
  return std::log2(cyl_bessel_i(1, 4.0 * k * r) / (2.0 * cyl_bessel_i(1, 2.0 * k * r)));
}

}  // namespace

TEST_CASE("solve_drift manufactured exponential converges at second order") {
  for (double k : {0.5, 1.0, 2.0}) {
    const auto e = errors_over([k](double h) { return exponential_problem(k, h); }, {16, 32, 64, 128});
    for (std::size_t i = 1; i < e.size(); ++i) CHECK(std::log2(e[i - 1] / e[i]) == doctest::Approx(2.0).epsilon(0.05));
  }
}

TEST_CASE("solve_drift harmonic examples") {
  const DriftProblem quad = harmonic_problem([](cplx z) { return (z * z).real(); }, 1.0 / 32);
  const DriftSolution s = solve_drift(quad);
  CHECK(max_error(s, quad.boundary) < 1e-12);
  CHECK(s.residual < 1e-10);
  CHECK(s.lambda == 0.0);

  // fourth differences of a harmonic cubic vanish, so the stencil is exact there too
  const DriftProblem cubic = harmonic_problem([](cplx z) { return std::pow(z, 3).real(); }, 1.0 / 32);
  CHECK(max_error(solve_drift(cubic), cubic.boundary) < 1e-12);

  const auto e = errors_over([](double h) { return harmonic_problem([](cplx z) { return std::pow(z, 5).real(); }, h); },
                             {16, 32, 64, 128});
  CHECK(e[3] < 1e-3);
  CHECK(std::log2(e[2] / e[3]) == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("discrete maximum principle for a divergence-free drift") {
  const DriftSolution s = solve_drift(power_drift_problem(3, 2.0, 1.0 / 48));
  double lo = INFINITY, hi = -INFINITY, ulo = INFINITY, uhi = -INFINITY;
  for (std::size_t i = 0; i < s.u.nx(); ++i) {
    for (std::size_t j = 0; j < s.u.ny(); ++j) {
      if (s.role(i, j) == static_cast<std::uint8_t>(NodeRole::Dirichlet)) {
        lo = std::min(lo, s.u(i, j));
        hi = std::max(hi, s.u(i, j));
      } else if (s.role(i, j) == static_cast<std::uint8_t>(NodeRole::Interior)) {
        ulo = std::min(ulo, s.u(i, j));
        uhi = std::max(uhi, s.u(i, j));
      }
    }
  }
  CHECK(ulo >= lo);
  CHECK(uhi <= hi);
  CHECK(s.lambda == doctest::Approx(2.0 * std::numbers::sqrt2).epsilon(0.01));
}

TEST_CASE("solve_drift errors") {
  try {
    solve_drift(exponential_problem(200.0, 1.0 / 64));
    FAIL("expected stencil-unstable");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::StencilUnstable);
  }
  CHECK_NOTHROW(solve_drift(exponential_problem(120.0, 1.0 / 64)));
  DriftProblem none;
  CHECK_THROWS_AS(solve_drift(none), Error);
  DriftProblem bad = harmonic_problem([](cplx) { return NAN; }, 0.1);
  CHECK_THROWS_AS(solve_drift(bad), Error);
  CHECK_THROWS_AS(solve_drift(harmonic_problem([](cplx) { return 0.0; }, 2.0)), Error);
}

TEST_CASE("a correction pass lifts the order to four") {
  const auto e = errors_over(
      [](double h) {
        DriftProblem p = exponential_problem(1.0, h);
        p.corrections = 1;
        return p;
      },
      {16, 32, 64});
  CHECK(std::log2(e[1] / e[2]) > 3.5);
}

TEST_CASE("gradient zeros by winding number") {
  const DriftSolution quad = solve_drift(harmonic_problem([](cplx z) { return (z * z).real(); }, 1.0 / 32));
  const auto z2 = gradient_zeros(quad);
  REQUIRE(z2.size() == 1);
  CHECK(z2[0].multiplicity == 1);
  CHECK(std::abs(z2[0].position) < 1e-12);

  CHECK(gradient_zeros(solve_drift(exponential_problem(1.0, 1.0 / 32))).empty());

  for (int lambda : {2, 4}) {
    DriftProblem p = power_drift_problem(lambda, 0.3, 1.0 / 64);
    int total = 0;
    for (const Root& r : gradient_zeros(solve_drift(p))) total += r.multiplicity;
    CHECK(total == lambda);
  }

  // F = z^2 - a^2 has simple zeros at +-a
  const cplx a(0.3, 0.2);
  const DriftSolution cubic = solve_drift(
      harmonic_problem([a](cplx z) { return (z * z * z / 3.0 - a * a * z).real(); }, 1.0 / 128));
  const auto zs = gradient_zeros(cubic);
  REQUIRE(zs.size() == 2);
  for (const Root& r : zs) {
    CHECK(r.multiplicity == 1);
    CHECK(std::min(std::abs(r.position - a), std::abs(r.position + a)) < 2e-3);
  }
}

TEST_CASE("psi for u = Re z^2 is the constant log 4") {
  const DriftSolution s = solve_drift(harmonic_problem([](cplx z) { return (z * z).real(); }, 1.0 / 64));
  const GradientLogField f = gradient_log_field(s);
  CHECK(f.reassembly <= 1e-8);
  std::size_t valid = 0;
  for (std::size_t k = 0; k < f.psi.size(); ++k) {
    if (!f.valid.values()[k]) continue;
    ++valid;
    CHECK(f.psi.values()[k] == doctest::Approx(std::log(4.0)).epsilon(1e-12));
  }
  CHECK(valid > 10000);
  CHECK(f.critical(64 + 1, 64 + 1) == 1);

  const PsiReport rep = psi_report(s, f, 20.0);
  CHECK(rep.max_abs_psi == doctest::Approx(std::log(4.0)).epsilon(1e-12));
  CHECK(rep.bmo < 1e-10);
  CHECK(rep.sampled > 100);
  CHECK(rep.max_small_scale_n < 1e-10);
  CHECK(rep.small_scale_ok);
  CHECK(rep.zero_count == 1);

  try {
    gradient_log_field(s, {{cplx(0.1, 0.0), 1}, {cplx(-0.1, 0.0), 1}});
    FAIL("expected zero mismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ZeroMismatch);
  }
  CHECK_NOTHROW(gradient_log_field(s, {{cplx(0.0, 0.0), 1}}));
}

TEST_CASE("psi for the exponential family") {
  const double k = 16.0;
  const DriftSolution s = solve_drift(exponential_problem(k, 1.0 / 128));
  const GradientLogField f = gradient_log_field(s);
  CHECK(f.zeros.empty());
  for (std::size_t k2 = 0; k2 < f.psi.size(); k2 += 37) {
    if (f.valid.values()[k2]) CHECK(f.psi.values()[k2] == f.phi.values()[k2]);
  }
  const double budget = measured_budget(s);
  CHECK(budget >= 10.0);
  const PsiReport rep = psi_report(s, f, budget);
  CHECK(rep.bmo < 1e-3 * 2.0 * k);
  CHECK(rep.sampled > 100);
  CHECK(rep.small_scale_ok);
  CHECK(rep.max_small_scale_n == doctest::Approx(exponential_frequency(k, rep.scale)).epsilon(0.02));
  MESSAGE("max|psi| / budget = " << rep.ratio);
}

TEST_CASE("dyadic BMO of a Gaussian oscillation against direct quadrature") {
  const int n = 513;
  const double h = 2.0 / (n - 1);
  const double side = 0.5;
  RealGridField gx({-1.0, -1.0}, h, n, n);
  RealGridField gy = gx.like<double>();
  MaskGrid valid = gx.like<std::uint8_t>(1);
  auto field = [](double x, double y) {
    const double env = 3.0 * std::exp(-(x * x + y * y) / 0.05);
    return std::array{env * std::cos(9.0 * x), env * std::sin(7.0 * y)};
  };
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const cplx z = gx.node(i, j);
      const auto g = field(z.real(), z.imag());
      gx(i, j) = g[0];
      gy(i, j) = g[1];
    }
  }
  const double est = dyadic_bmo(gx, gy, valid, side);

  // continuous mean oscillation over the same dyadic squares, tensor Gauss-Legendre
  const GaussLegendre gl = gauss_legendre(48);
  double direct = 0.0;
  for (int per = 1; 2.0 * side / per >= 2.0 * h; per *= 2) {
    const double s = 2.0 * side / per;
    for (int a = 0; a < per; ++a) {
      for (int b = 0; b < per; ++b) {
        const double x0 = -side + a * s;
        const double y0 = -side + b * s;
        auto mean_of = [&](auto&& f) {
          double acc = 0.0;
          for (std::size_t p = 0; p < gl.nodes.size(); ++p)
            for (std::size_t q = 0; q < gl.nodes.size(); ++q)
              acc += gl.weights[p] * gl.weights[q] *
                     f(x0 + 0.5 * s * (gl.nodes[p] + 1.0), y0 + 0.5 * s * (gl.nodes[q] + 1.0));
          return acc / 4.0;
        };
        const double mx = mean_of([&](double x, double y) { return field(x, y)[0]; });
        const double my = mean_of([&](double x, double y) { return field(x, y)[1]; });
        direct = std::max(direct, mean_of([&](double x, double y) {
          const auto g = field(x, y);
          return std::hypot(g[0] - mx, g[1] - my);
        }));
      }
    }
  }
  CHECK(est == doctest::Approx(direct).epsilon(0.05));

  const RealGridField flat = gx.like<double>(1.5);
  CHECK(dyadic_bmo(flat, flat, valid, side) < 1e-14);
}

TEST_CASE("weak form of the phi equation") {
  // harmonic: phi = log(4|z|^2) away from 0, bumps kept off the origin
  std::vector<double> res;
  for (int n : {32, 64, 128}) {
    const DriftSolution s = solve_drift(harmonic_problem([](cplx z) { return (z * z).real(); }, 1.0 / n));
    const GradientLogField f = gradient_log_field(s);
    const std::vector<TestBump> bank{{{0.5, 0.0}, 0.3}, {{-0.2, 0.5}, 0.25}, {{0.0, -0.6}, 0.2}};
    res.push_back(phi_weak_residual(s, f, bank));
  }
  CHECK(res[2] < res[1]);
  CHECK(std::log2(res[1] / res[2]) >= 0.9);

  // drift instance with zeros, bank built automatically
  std::vector<double> dres;
  for (int n : {64, 128}) {
    const DriftSolution s = solve_drift(power_drift_problem(2, 0.5, 1.0 / n));
    const GradientLogField f = gradient_log_field(s);
    const std::vector<TestBump> bank = default_test_bank(f, 0.2, 0.9, 0.1);
    REQUIRE(bank.size() > 5);
    dres.push_back(phi_weak_residual(s, f, bank));
  }
  CHECK(std::log2(dres[0] / dres[1]) >= 0.9);

  // exponential: the right side is (k, 0) and grad phi = (-2k, 0)
  const DriftSolution e = solve_drift(exponential_problem(1.0, 1.0 / 64));
  const GradientLogField fe = gradient_log_field(e);
  const std::vector<TestBump> eb{{{0.0, 0.0}, 0.5}};
  CHECK(phi_weak_residual(e, fe, eb) < 1e-3);

  // linear u with b orthogonal to grad u: both sides vanish
  DriftProblem lin;
  lin.h = 1.0 / 32;
  lin.boundary = [](cplx z) { return 2.0 * z.real() + z.imag(); };
  lin.drift = [](cplx z) { return std::array{-std::sin(3.0 * z.imag()), 2.0 * std::sin(3.0 * z.imag())}; };
  const DriftSolution ls = solve_drift(lin);
  const GradientLogField lf = gradient_log_field(ls);
  const std::vector<TestBump> lb{{{0.1, 0.2}, 0.4}};
  CHECK(phi_weak_residual(ls, lf, lb) < 1e-10);

  // a bump over the critical point is rejected
  const DriftSolution q = solve_drift(harmonic_problem([](cplx z) { return (z * z).real(); }, 1.0 / 32));
  const std::vector<TestBump> bad{{{0.0, 0.0}, 0.2}};
  try {
    phi_weak_residual(q, gradient_log_field(q), bad);
    FAIL("expected mask overlap");
  } catch (const Error& err) {
    CHECK(err.kind() == ErrorKind::MaskOverlap);
  }
}

TEST_CASE("bump test functions") {
  const TestBump b{{0.2, -0.1}, 0.3};
  CHECK(b.value(b.center) == doctest::Approx(1.0));
  CHECK(b.value({0.6, -0.1}) == 0.0);
  const cplx z(0.3, 0.0);
  const double d = 1e-6;
  const auto g = b.gradient(z);
  CHECK(g[0] == doctest::Approx((b.value(z + d) - b.value(z - d)) / (2 * d)).epsilon(1e-6));
  CHECK(g[1] == doctest::Approx((b.value(z + cplx(0, d)) - b.value(z - cplx(0, d))) / (2 * d)).epsilon(1e-6));
}

TEST_CASE("appendix identity") {
  CHECK(appendix_identity_residual(1, 0, 1, 0, 0) == 0.0);
  CHECK(appendix_identity_residual(1, 0, 0, 1, 0) == 0.0);
  CHECK(appendix_identity_scale(1, 0, 1, 0, 0) == doctest::Approx(2 + 4 + 4 + 2));
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int t = 0; t < 100; ++t) {
    const double a = u(rng), b = u(rng), c = u(rng);
    CHECK(appendix_identity_residual(0, 0, a, b, c) == 0.0);
  }
  double worst = 0.0;
  for (int t = 0; t < 100000; ++t) {
    const double v[5] = {u(rng), u(rng), u(rng), u(rng), u(rng)};
    const double s = appendix_identity_scale(v[0], v[1], v[2], v[3], v[4]);
    worst = std::max(worst, std::abs(appendix_identity_residual(v[0], v[1], v[2], v[3], v[4])) / s);
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("measured budget and zero count") {
  for (int lambda : {2, 4}) {
    DriftProblem p = power_drift_problem(lambda, 0.0, 1.0 / 128);
    p.corrections = 1;
    const DriftSolution s = solve_drift(p);
    const double budget = measured_budget(s);
    CHECK(budget == doctest::Approx(2.0 * lambda).epsilon(1e-3));
    int total = 0;
    for (const Root& r : gradient_zeros(s)) total += r.multiplicity;
    CHECK(total <= budget);
  }
}

TEST_CASE("drift superlevel sweep") {
  const std::vector<int> lambdas{4};
  const std::vector<double> strengths{0.0, 0.05, 500.0};
  const std::vector<double> rs{1.0 / 32};
  DriftSuperlevelOptions opts;
  opts.h = 1.0 / 128;
  const auto rows = drift_superlevel_experiment(lambdas, strengths, rs, opts);
  REQUIRE(rows.size() == 3);
  const SuperlevelResult harmonic = superlevel_volume(make_field({{cplx(0), 4}}, {cplx(0)}, 1.0), rs[0], 1.0);
  CHECK_FALSE(rows[0].failed);
  CHECK(rows[0].area == doctest::Approx(harmonic.area).epsilon(0.1));
  CHECK(rows[0].harmonic_normalized == doctest::Approx(rows[0].area / (16.0 * rs[0] * rs[0])));
  CHECK(rows[0].normalized == doctest::Approx(rows[0].area / (32.0 * rs[0] * rs[0])));
  CHECK_FALSE(rows[1].failed);
  CHECK(rows[1].area > rows[0].area / 4.0);
  CHECK(rows[1].area < rows[0].area * 4.0);
  CHECK(rows[2].failed);
  CHECK(rows[2].error.find("stencil") != std::string::npos);

  std::ostringstream os;
  write_drift_superlevel_csv_header(os);
  for (const auto& r : rows) write_drift_superlevel_csv_row(os, r);
  const std::string csv = os.str();
  CHECK(csv.rfind("lambda,strength,r,threshold,h,area,normalized", 0) == 0);
  CHECK(csv.find(",failed\n") != std::string::npos);
}
