#include "harmgrad/frequency.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>

#include <unsupported/Eigen/Polynomials>

#include "harmgrad/parallel.hpp"

namespace harmgrad {

double frequency_of(const LogDensity& log_f, cplx x, double r, const DiskRule& rule) {
  return frequency_with(log_f, x, r, rule);
}

double frequency_ball(const HoloField& field, cplx x, double r, const DiskRule& rule) {
  return frequency_with([&field](cplx z) { return field.log_abs2(z); }, x, r, rule);
}

double frequency_ball(const HoloField& field, cplx x, double r, int quad_points) {
  if (quad_points < kMinQuadPoints) {
    throw Error(ErrorKind::InvalidInput, "frequency_ball needs quad_points >= 64");
  }
  return frequency_ball(field, x, r, DiskRule(quad_points));
}

double frequency_series(const SeriesRep& rep, double r) {
  if (!(r > 0.0)) throw Error(ErrorKind::InvalidInput, "frequency scale must be positive");
  LogSumExp num;
  LogSumExp den;
  const double log_r = std::log(r);
  bool any = false;
  for (std::size_t k = 0; k < rep.coeffs.size(); ++k) {
    const double a = rep.coeffs[k];
    if (a == 0.0) continue;
    any = true;
    const double d = static_cast<double>(k + 1);
    const double t = std::log(d * a * a) + 2.0 * d * log_r;
    den.add(t);
    num.add(t + (2.0 * d - 2.0) * std::numbers::ln2);
  }
  if (!any) throw Error(ErrorKind::AllZeroCoefficients, "series has no nonzero coefficient");
  return (num.value() - den.value()) / std::numbers::ln2;
}

double frequency_supinf(const HoloField& field, cplx x, double r, SupInfOptions opts) {
  if (!(r > 0.0)) throw Error(ErrorKind::InvalidInput, "frequency scale must be positive");
  if (opts.radial < 1 || opts.angular < 4) {
    throw Error(ErrorKind::InvalidInput, "sup/inf sampling density too low");
  }
  auto extreme = [&](double radius, bool want_max) {
    double best = field.log_abs2(x);
    for (int k = 1; k <= opts.radial; ++k) {
      const double rho = radius * k / opts.radial;
      for (int a = 0; a < opts.angular; ++a) {
        const double v = field.log_abs2(x + std::polar(rho, 2.0 * std::numbers::pi * a / opts.angular));
        best = want_max ? std::max(best, v) : std::min(best, v);
      }
    }
    return best;
  };
  const double lo = extreme(r, false);
  if (!std::isfinite(lo)) throw Error(ErrorKind::Degenerate, "infimum over the inner disk vanishes");
  const double hi = extreme(2.0 * r, true);
  return (hi - lo) / std::numbers::ln2;
}

std::vector<MonotonicityViolation> monotonicity_scan(const SeriesRep& rep,
                                                     std::span<const double> r_grid, double tol) {
  std::vector<MonotonicityViolation> out;
  if (r_grid.size() < 2) return out;
  double prev = frequency_series(rep, r_grid[0]);
  for (std::size_t k = 0; k + 1 < r_grid.size(); ++k) {
    if (!(r_grid[k + 1] > r_grid[k])) {
      throw Error(ErrorKind::InvalidInput, "r_grid must be strictly increasing");
    }
    const double next = frequency_series(rep, r_grid[k + 1]);
    if (next < prev - tol) out.push_back({k, r_grid[k], r_grid[k + 1], prev, next});
    prev = next;
  }
  return out;
}

HoloField series_to_field(const SeriesRep& rep) {
  const auto& a = rep.coeffs;
  std::size_t first = a.size();
  std::size_t last = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (!std::isfinite(a[k])) throw Error(ErrorKind::NonFinite, "series coefficients must be finite");
    if (a[k] != 0.0) {
      first = std::min(first, k);
      last = k;
    }
  }
  if (first == a.size()) throw Error(ErrorKind::AllZeroCoefficients, "series has no nonzero coefficient");

  // F(c + w) = sum_d d a_d w^{d-1} = w^first * q(w), q of degree last - first
  std::vector<Root> roots;
  if (first > 0) roots.push_back({rep.center, static_cast<int>(first)});
  const std::size_t deg = last - first;
  const double lead = static_cast<double>(last + 1) * a[last];
  if (deg > 0) {
    Eigen::VectorXd q(deg + 1);
    for (std::size_t k = 0; k <= deg; ++k) {
      q[static_cast<Eigen::Index>(k)] = static_cast<double>(first + k + 1) * a[first + k];
    }
    Eigen::PolynomialSolver<double, Eigen::Dynamic> solver;
    solver.compute(q);
    for (Eigen::Index k = 0; k < solver.roots().size(); ++k) {
      roots.push_back({rep.center + solver.roots()[k], 1});
    }
  }
  return HoloField(std::move(roots), {cplx(0.0, 0.0)}, cplx(lead, 0.0));
}

std::string to_string(FrequencyMethod m) {
  switch (m) {
    case FrequencyMethod::Quadrature: return "quadrature";
    case FrequencyMethod::Series: return "series";
    case FrequencyMethod::SupInf: return "supinf";
  }
  return "unknown";
}

FrequencyProfile frequency_profile(const HoloField& field, std::span<const cplx> centers,
                                   std::span<const double> scales, FrequencyMethod method,
                                   int quad_points) {
  if (method == FrequencyMethod::Series) {
    throw Error(ErrorKind::InvalidInput, "series profiles take a SeriesRep");
  }
  FrequencyProfile p;
  p.centers.assign(centers.begin(), centers.end());
  p.scales.assign(scales.begin(), scales.end());
  p.method = method;
  p.quad_points = quad_points;
  p.values.assign(centers.size() * scales.size(), 0.0);
  const DiskRule rule(quad_points);
  parallel_for(p.values.size(), [&](std::size_t idx) {
    const cplx x = p.centers[idx / p.scales.size()];
    const double r = p.scales[idx % p.scales.size()];
    p.values[idx] = method == FrequencyMethod::Quadrature ? frequency_ball(field, x, r, rule)
                                                          : frequency_supinf(field, x, r);
  });
  return p;
}

FrequencyProfile frequency_profile(const SeriesRep& rep, std::span<const double> scales) {
  FrequencyProfile p;
  p.centers = {rep.center};
  p.scales.assign(scales.begin(), scales.end());
  p.method = FrequencyMethod::Series;
  for (double r : scales) p.values.push_back(frequency_series(rep, r));
  return p;
}

void write_csv(const FrequencyProfile& profile, std::ostream& os) {
  os << "center_re,center_im,scale,N,method\n";
  char buf[160];
  for (std::size_t c = 0; c < profile.centers.size(); ++c) {
    for (std::size_t s = 0; s < profile.scales.size(); ++s) {
      std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g,", profile.centers[c].real(),
                    profile.centers[c].imag(), profile.scales[s], profile.at(c, s));
      os << buf << to_string(profile.method) << '\n';
    }
  }
}

}  // namespace harmgrad
