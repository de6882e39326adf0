#include <doctest.h>

#include <cmath>
#include <random>

#include "harmgrad/spectral.hpp"

using namespace harmgrad;

namespace {

// Cell-averaged indicator of the unit disk on [-2, 2]^2 with n x n cell centres.
ComplexGridField disk_indicator(int n) {
  const double h = 4.0 / n;
  ComplexGridField f({-2.0 + 0.5 * h, -2.0 + 0.5 * h}, h, n, n);
  constexpr int kSub = 8;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const cplx z = f.node(i, j);
      int in = 0;
      for (int a = 0; a < kSub; ++a)
        for (int b = 0; b < kSub; ++b)
          in += std::abs(z + cplx((a + 0.5) / kSub - 0.5, (b + 0.5) / kSub - 0.5) * h) < 1.0;
      f(i, j) = static_cast<double>(in) / (kSub * kSub);
    }
  }
  return f;
}

ComplexGridField gaussian(cplx origin, double h, int n, cplx c, double w) {
  ComplexGridField f(origin, h, n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) f(i, j) = std::exp(-std::norm(f.node(i, j) - c) / w);
  return f;
}

double banded_error(const ComplexGridField& got, bool beurling) {
  double e = 0.0;
  for (std::size_t i = 0; i < got.nx(); ++i) {
    for (std::size_t j = 0; j < got.ny(); ++j) {
      const cplx z = got.node(i, j);
      const double r = std::abs(z);
      if (std::abs(r - 1.0) < 0.1) continue;
      const cplx want = beurling ? (r < 1.0 ? cplx(0.0) : -1.0 / (z * z)) : (r < 1.0 ? std::conj(z) : 1.0 / z);
      e = std::max(e, std::abs(got(i, j) - want));
    }
  }
  return e;
}

}  // namespace

TEST_CASE("transforms of zero are zero") {
  const ComplexGridField z({0.0, 0.0}, 0.1, 16, 16);
  CHECK(max_abs(cauchy_transform(z)) == 0.0);
  CHECK(max_abs(beurling_transform(z)) == 0.0);
}

TEST_CASE("support on the border is rejected") {
  ComplexGridField f({0.0, 0.0}, 0.1, 16, 16);
  f(0, 5) = 1.0;
  try {
    cauchy_transform(f);
    FAIL("expected unpadded-support error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnpaddedSupport);
  }
}

TEST_CASE("disk indicator matches the closed forms with first-order convergence") {
  std::vector<double> ec;
  std::vector<double> es;
  for (int n : {128, 256}) {
    const ComplexGridField f = disk_indicator(n);
    ec.push_back(banded_error(cauchy_transform(f), false));
    es.push_back(banded_error(beurling_transform(f), true));
  }
  CHECK(ec[1] < 1e-3);
  CHECK(es[1] < 5e-2);
  CHECK(std::log2(ec[0] / ec[1]) >= 0.9);
}

TEST_CASE("linearity") {
  const double h = 0.05;
  const int n = 64;
  const cplx o(-1.6, -1.6);
  const ComplexGridField f = gaussian(o, h, n, {0.1, 0.2}, 0.04);
  const ComplexGridField g = gaussian(o, h, n, {-0.3, 0.0}, 0.05);
  const cplx a(0.7, -1.2);
  const cplx b(-0.4, 2.0);
  ComplexGridField mix = f;
  for (std::size_t k = 0; k < mix.size(); ++k) mix.values()[k] = a * f.values()[k] + b * g.values()[k];
  for (int kind = 0; kind < 2; ++kind) {
    auto T = [&](const ComplexGridField& x) { return kind == 0 ? cauchy_transform(x) : beurling_transform(x); };
    const ComplexGridField tf = T(f);
    const ComplexGridField tg = T(g);
    const ComplexGridField tm = T(mix);
    double err = 0.0;
    for (std::size_t k = 0; k < tm.size(); ++k) {
      err = std::max(err, std::abs(tm.values()[k] - a * tf.values()[k] - b * tg.values()[k]));
    }
    CHECK(err <= 1e-12 * max_abs(tm));
  }
}

TEST_CASE("dbar of the Cauchy transform recovers f") {
  std::vector<double> err;
  for (int n : {64, 128, 256}) {
    const double h = 3.2 / n;
    const ComplexGridField f = gaussian({-1.6, -1.6}, h, n, {0.1, -0.05}, 0.04);
    const ComplexGridField back = dzbar_fd(cauchy_transform(f));
    double e = 0.0;
    for (int i = 1; i + 1 < n; ++i)
      for (int j = 1; j + 1 < n; ++j) e = std::max(e, std::abs(back(i, j) - f(i, j)));
    err.push_back(e);
  }
  CHECK(std::log2(err[1] / err[2]) >= 0.9);
  CHECK(err[2] < 5e-3);
}

TEST_CASE("Beurling transform maps dbar h to dz h") {
  const int n = 128;
  const double h = 3.2 / n;
  const double w = 0.05;
  const ComplexGridField g = gaussian({-1.6, -1.6}, h, n, 0.0, w);
  ComplexGridField dbar = g;
  ComplexGridField dz = g;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const cplx z = g.node(i, j);
      dbar(i, j) = -z / w * g(i, j);
      dz(i, j) = -std::conj(z) / w * g(i, j);
    }
  }
  const ComplexGridField s = beurling_transform(dbar);
  double e = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) e = std::max(e, std::abs(s.values()[k] - dz.values()[k]));
  CHECK(e < 1e-8);

  // S agrees with dz of C up to the finite-difference error
  const ComplexGridField via_c = dz_fd(cauchy_transform(g));
  const ComplexGridField direct = beurling_transform(g);
  double d = 0.0;
  for (int i = 1; i + 1 < n; ++i)
    for (int j = 1; j + 1 < n; ++j) d = std::max(d, std::abs(via_c(i, j) - direct(i, j)));
  CHECK(d < 5e-3);
}

TEST_CASE("Beurling transform is an isometry on the periodic box") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 96;
    const double h = 0.04;
    ComplexGridField f({-1.92, -1.92}, h, n, n);
    for (int k = 0; k < 3; ++k) {
      const ComplexGridField g = gaussian(f.origin(), h, n, {0.5 * u(rng), 0.5 * u(rng)}, 0.01 + 0.02 * std::abs(u(rng)));
      const cplx c(u(rng), u(rng));
      for (std::size_t q = 0; q < f.size(); ++q) f.values()[q] += c * g.values()[q];
    }
    const ComplexGridField s = beurling_transform(f, {false, true});
    CHECK(std::abs(l2_norm(s) / l2_norm(f) - 1.0) <= 1e-10);

    // with the mass removed the far-field correction is inert
    cplx mass(0.0);
    for (const cplx& v : f.values()) mass += v;
    const ComplexGridField bump = gaussian(f.origin(), h, n, 0.0, 0.05);
    cplx bmass(0.0);
    for (const cplx& v : bump.values()) bmass += v;
    for (std::size_t q = 0; q < f.size(); ++q) f.values()[q] -= mass / bmass * bump.values()[q];
    const ComplexGridField s0 = beurling_transform(f, {true, true});
    CHECK(std::abs(l2_norm(s0) / l2_norm(f) - 1.0) <= 1e-10);
  }
}
