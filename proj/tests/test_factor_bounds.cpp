#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/bessel.hpp>

#include "harmgrad/factor_bounds.hpp"
#include "harmgrad/frequency.hpp"

using namespace harmgrad;

namespace {

// Mean over B_R(0) of |z|^{2p} e^{2x}: (2/R^2) int_0^R rho^{2p+1} I_0(2 rho) drho.
double disk_mean_power_exp(int p, double radius) {
  auto g = [p](double rho) { return std::pow(rho, 2 * p + 1) * boost::math::cyl_bessel_i(0, 2.0 * rho); };
  return 2.0 * boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, 0.0, radius, 10, 1e-14) /
         (radius * radius);
}

HoloField random_field(std::mt19937_64& rng, int max_degree, int max_exp_degree, double root_box) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Root> roots;
  for (int left = static_cast<int>(rng() % (max_degree + 1)); left > 0;) {
    const int m = std::min(left, 1 + static_cast<int>(rng() % 2));
    roots.push_back({{root_box * u(rng), root_box * u(rng)}, m});
    left -= m;
  }
  std::vector<cplx> q;
  for (int k = 0, n = static_cast<int>(rng() % (max_exp_degree + 1)); k <= n; ++k) q.emplace_back(u(rng), u(rng));
  return HoloField(roots, q, {1.0, 0.0});
}

// e^{s Q} with s chosen by bisection so that N(0,1) hits the target.
HoloField exp_field_with_frequency(std::mt19937_64& rng, double target) {
  std::normal_distribution<double> n(0.0, 1.0);
  const int deg = 1 + static_cast<int>(rng() % 3);
  std::vector<cplx> q{cplx(0)};
  for (int k = 1; k <= deg; ++k) q.emplace_back(n(rng), n(rng));
  auto make = [&](double s) {
    std::vector<cplx> qs = q;
    for (auto& c : qs) c *= s;
    return HoloField({}, qs, 1.0);
  };
  double lo = 0.0;
  double hi = 1.0;
  while (frequency_ball(make(hi), 0.0, 1.0, 4096) < target) hi *= 2.0;
  for (int it = 0; it < 40; ++it) {
    const double mid = 0.5 * (lo + hi);
    (frequency_ball(make(mid), 0.0, 1.0, 4096) < target ? lo : hi) = mid;
  }
  return make(lo);
}

}  // namespace

TEST_CASE("factor_in_disk examples") {
  const HoloField f = make_field({{cplx(0.3), 1}, {cplx(1.7), 1}}, {cplx(0), cplx(0.5, 0.2)}, 1.0);
  const Factorization fac = factor_in_disk(f);
  REQUIRE(fac.poly_roots.size() == 1);
  CHECK(fac.poly_roots[0].position == cplx(0.3));
  CHECK(fac.cofactor.degree() == 1);
  CHECK(fac.cofactor.roots()[0].position == cplx(1.7));
  CHECK(fac.monic_flag);

  const HoloField e = make_field({}, {cplx(0), cplx(6)}, 1.0);
  CHECK(factor_in_disk(e).poly_roots.empty());
  CHECK(factor_in_disk(e).cofactor(0.4) == e(0.4));

  const Factorization m = factor_in_disk(make_field({{cplx(0), 7}}, {cplx(0)}, 1.0));
  CHECK(m.poly_degree() == 7);
  CHECK(m.cofactor.degree() == 0);
  CHECK(m.cofactor(0.3) == cplx(1.0));

  CHECK_THROWS_AS(factor_in_disk(make_field({{cplx(0.0, 1.0), 1}}, {cplx(0)}, 1.0)), Error);
}

TEST_CASE("factorization reassembles the field") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const HoloField f = random_field(rng, 12, 3, 1.5);
    const Factorization fac = factor_in_disk(f);
    for (const Root& r : fac.cofactor.roots()) CHECK(std::abs(r.position) > 1.0);
    for (int k = 0; k < 200; ++k) {
      const cplx z = std::polar(std::sqrt(std::abs(u(rng))), 3.14159265 * u(rng));
      const cplx fz = f(z);
      CHECK(std::abs(fac.poly(z) * fac.cofactor(z) - fz) <= 1e-10 * std::abs(fz));
    }
  }
}

TEST_CASE("count_zeros_circle examples") {
  CHECK(count_zeros_circle(make_field({{cplx(0), 2}}, {cplx(0)}, 1.0), 0.0, 0.5) == 2);
  const HoloField f = make_field({{cplx(0.3), 1}, {cplx(-0.9), 1}}, {cplx(0), cplx(1)}, 1.0);
  CHECK(count_zeros_circle(f, 0.0, 0.5) == listed_zeros_inside(f, 0.0, 0.5));
  CHECK(count_zeros_circle(f, 0.0, 0.5) == 1);
  const HoloField e = make_field({}, {cplx(0), cplx(8)}, 1.0);
  CHECK(count_zeros_circle(e, 0.0, 0.5) == 0);
  CHECK(count_zeros_circle(e, {0.3, -0.2}, 1.7) == 0);

  try {
    count_zeros_circle(f, 0.0, 0.3);
    FAIL("expected near-contour error");
  } catch (const Error& err) {
    CHECK(err.kind() == ErrorKind::NearContour);
  }
}

TEST_CASE("argument principle matches listed roots on random fields") {
  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const HoloField f = random_field(rng, 12, 3, 1.2);
    const cplx c(0.3 * u(rng), 0.3 * u(rng));
    const double r = 0.2 + 0.6 * std::abs(u(rng));
    if (count_zeros_circle(f, c, r) != listed_zeros_inside(f, c, r)) ++mismatches;
  }
  CHECK(mismatches == 0);
}

TEST_CASE("nonvanishing_report examples") {
  const NonvanishingReport one = nonvanishing_report(HoloField(), 1.0);
  CHECK(one.max_log_half == 0.0);
  CHECK(one.sup_small_scale_n == doctest::Approx(0.0));
  CHECK(one.ratio == 0.0);
  CHECK_FALSE(one.violation);

  const double lambda = 8.0;
  const HoloField e = make_field({}, {cplx(0), cplx(lambda)}, 1.0);
  const NonvanishingReport rep = nonvanishing_report(e, 22.0);
  // |log|F|| = lambda |x| on B_1/2, maximal at x = +-1/2
  CHECK(rep.max_log_half_raw == doctest::Approx(lambda / 2).epsilon(1e-12));
  // after dividing by max_{B_1}|F| = e^lambda the extreme is at x = -1/2
  CHECK(rep.max_log_half == doctest::Approx(1.5 * lambda).epsilon(1e-12));
  CHECK(rep.max_log_half <= 10.0 * rep.budget);
  CHECK(rep.sup_small_scale_n <= 0.5);
  CHECK_FALSE(rep.violation);

  // frequency at scale c / budget from the Bessel form, the same at every center
  const double s = rep.scale;
  auto mean = [&](double radius) {
    auto g = [&](double rho) { return rho * boost::math::cyl_bessel_i(0, 2.0 * lambda * rho); };
    return 2.0 * boost::math::quadrature::gauss_kronrod<double, 31>::integrate(g, 0.0, radius) / (radius * radius);
  };
  CHECK(rep.sup_small_scale_n == doctest::Approx(std::log2(mean(2 * s) / mean(s))).epsilon(1e-6));

  try {
    nonvanishing_report(e, 10.0);
    FAIL("expected budget violation");
  } catch (const Error& err) {
    CHECK(err.kind() == ErrorKind::BudgetViolated);
  }
  CHECK_THROWS_AS(nonvanishing_report(make_field({{cplx(0.5), 1}}, {cplx(0)}, 1.0), 10.0), Error);
}

TEST_CASE("log-gradient ratio is stable across seeds and small-scale frequency stays below 1/2") {
  std::vector<double> worst;
  for (std::uint64_t seed : {101u, 202u, 303u}) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> target(10.0, 30.0);
    std::vector<double> ratios;
    for (int k = 0; k < 24; ++k) {
      const HoloField f = exp_field_with_frequency(rng, target(rng));
      NonvanishingOptions opts;
      opts.center_grid = 32;
      const NonvanishingReport rep = nonvanishing_report(f, target.b() + 1.0, opts);
      ratios.push_back(rep.max_log_half / rep.n_unit);
      CHECK(rep.n_unit >= 10.0 - 1e-6);
      // with budget = N(0,1) the probed scale is c / Lambda
      const NonvanishingReport at_lambda = nonvanishing_report(f, rep.n_unit * (1 + 1e-12), opts);
      CHECK(at_lambda.sup_small_scale_n <= 0.5);
    }
    std::sort(ratios.begin(), ratios.end());
    worst.push_back(ratios.back());
  }
  const auto [lo, hi] = std::minmax_element(worst.begin(), worst.end());
  MESSAGE("max log-gradient ratio per seed: " << worst[0] << " " << worst[1] << " " << worst[2]);
  CHECK(*hi <= 1.2 * *lo);
}

TEST_CASE("quasi_subadditivity_check examples") {
  const HoloField g = make_field({}, {cplx(0), cplx(1.0)}, 1.0);
  const SubadditivityReport a = quasi_subadditivity_check(g, 100.0);
  CHECK(a.n_cofactor == doctest::Approx(frequency_ball(g, 0.0, 5.0, 4096)).epsilon(1e-14));
  CHECK(a.n_cofactor <= a.n_field + 1e-12);

  const HoloField f = make_field({{cplx(0), 1}}, {cplx(0), cplx(1.0)}, 1.0);
  const SubadditivityReport b = quasi_subadditivity_check(f, 100.0);
  const double n_f = std::log2(disk_mean_power_exp(1, 20.0) / disk_mean_power_exp(1, 10.0));
  const double n_g = std::log2(disk_mean_power_exp(0, 10.0) / disk_mean_power_exp(0, 5.0));
  CHECK(b.n_field == doctest::Approx(n_f).epsilon(1e-8));
  CHECK(b.n_cofactor == doctest::Approx(n_g).epsilon(1e-8));
  CHECK(b.ratio == doctest::Approx(n_g / n_f).epsilon(1e-8));
  CHECK_FALSE(b.violation);

  const SubadditivityReport c = quasi_subadditivity_check(make_field({{cplx(0), 6}}, {cplx(0)}, 1.0), 20.0);
  CHECK(c.n_cofactor == 0.0);
  CHECK(c.n_field == doctest::Approx(12.0));

  CHECK_THROWS_AS(quasi_subadditivity_check(make_field({{cplx(1.5), 1}}, {cplx(0)}, 1.0), 10.0), Error);

  const nlohmann::json rec = to_json(to_record(b, f));
  CHECK(rec.at("lemma") == "quasi-subadditivity");
  CHECK(rec.at("pass") == true);
  CHECK(rec.at("threshold").get<double>() == doctest::Approx(1000.0));
}
