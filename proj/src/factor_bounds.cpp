#include "harmgrad/factor_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "harmgrad/frequency.hpp"
#include "harmgrad/parallel.hpp"

namespace harmgrad {

cplx Factorization::poly(cplx z) const {
  cplx p(1.0, 0.0);
  for (const Root& r : poly_roots) {
    const cplx d = z - r.position;
    for (int k = 0; k < r.multiplicity; ++k) p *= d;
  }
  return p;
}

int Factorization::poly_degree() const noexcept {
  int n = 0;
  for (const Root& r : poly_roots) n += r.multiplicity;
  return n;
}

Factorization factor_in_disk(const HoloField& field) {
  Factorization out;
  std::vector<Root> outside;
  for (const Root& r : field.roots()) {
    const double m = std::abs(r.position);
    if (std::abs(m - 1.0) <= kBoundaryRootTol) {
      throw Error(ErrorKind::BoundaryRoot, "root on the unit circle");
    }
    (m < 1.0 ? out.poly_roots : outside).push_back(r);
  }
  out.cofactor = HoloField(std::move(outside), field.exp_poly(), field.scale());
  return out;
}

int listed_zeros_inside(const HoloField& field, cplx center, double radius) {
  int n = 0;
  for (const Root& r : field.roots()) {
    if (std::abs(r.position - center) < radius) n += r.multiplicity;
  }
  return n;
}

int count_zeros_circle(const HoloField& field, cplx center, double radius, ZeroCountOptions opts) {
  if (!(radius > 0.0)) throw Error(ErrorKind::InvalidInput, "radius must be positive");
  if (opts.quad_points < 8) throw Error(ErrorKind::InvalidInput, "need at least 8 contour points");
  for (const Root& r : field.roots()) {
    if (std::abs(std::abs(r.position - center) - radius) < opts.near_tol) {
      throw Error(ErrorKind::NearContour, "root within tolerance of the contour");
    }
  }
  // (1/2 pi i) \oint F'/F dz = mean over theta of F'/F * (z - c)
  auto sum_at = [&](int n, int start, int step) {
    cplx s(0.0, 0.0);
    for (int k = start; k < n; k += step) {
      const cplx w = std::polar(radius, 2.0 * std::numbers::pi * k / n);
      const cplx z = center + w;
      s += field.derivative(z) / field(z) * w;
    }
    return s;
  };
  int n = opts.quad_points;
  cplx total = sum_at(n, 0, 1);
  cplx value = total / static_cast<double>(n);
  for (;;) {
    if (!std::isfinite(value.real()) || !std::isfinite(value.imag())) {
      throw Error(ErrorKind::NonFinite, "log-derivative overflow on the contour");
    }
    if (2 * n > opts.max_quad_points) break;
    total += sum_at(2 * n, 1, 2);
    n *= 2;
    const cplx next = total / static_cast<double>(n);
    const bool settled = std::abs(next - value) < 1e-8;
    value = next;
    if (settled) break;
  }
  const double k = std::round(value.real());
  if (std::abs(value.real() - k) > 0.25 || std::abs(value.imag()) > 0.25) {
    throw Error(ErrorKind::QuadratureFailure, "argument-principle residue is not near an integer");
  }
  return static_cast<int>(k);
}

namespace {

double max_on_circle(const HoloField& f, double radius, int samples, bool absolute, double shift) {
  double best = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < samples; ++k) {
    const double v = 0.5 * f.log_abs2(std::polar(radius, 2.0 * std::numbers::pi * k / samples)) - shift;
    best = std::max(best, absolute ? std::abs(v) : v);
  }
  return best;
}

}  // namespace

NonvanishingReport nonvanishing_report(const HoloField& field, double budget, NonvanishingOptions opts) {
  if (!(budget > 0.0)) throw Error(ErrorKind::InvalidInput, "budget must be positive");
  if (!(opts.c > 0.0) || opts.center_grid < 1 || opts.boundary_samples < 8) {
    throw Error(ErrorKind::InvalidInput, "bad nonvanishing options");
  }
  for (const Root& r : field.roots()) {
    if (std::abs(r.position) <= 1.0) {
      throw Error(ErrorKind::InvalidInput, "field vanishes in the closed unit disk");
    }
  }
  NonvanishingReport rep;
  rep.budget = budget;
  rep.n_unit = frequency_ball(field, 0.0, 1.0, 4096);
  if (rep.n_unit > budget) {
    throw Error(ErrorKind::BudgetViolated, "N(0,1) = " + std::to_string(rep.n_unit) + " exceeds the budget");
  }
  // extremes of the harmonic log|F| are taken on boundary circles
  rep.log_max_unit = max_on_circle(field, 1.0, opts.boundary_samples, false, 0.0);
  rep.max_log_half_raw = max_on_circle(field, 0.5, opts.boundary_samples, true, 0.0);
  rep.max_log_half = max_on_circle(field, 0.5, opts.boundary_samples, true, rep.log_max_unit);
  rep.ratio = rep.max_log_half / budget;
  rep.scale = opts.c / budget;

  std::vector<cplx> centers;
  const int g = opts.center_grid;
  for (int i = 0; i < g; ++i) {
    for (int j = 0; j < g; ++j) {
      const cplx x(-1.0 + (2.0 * i + 1.0) / g, -1.0 + (2.0 * j + 1.0) / g);
      if (std::abs(x) < 1.0) centers.push_back(x);
    }
  }
  if (centers.empty()) centers.push_back(0.0);
  std::vector<double> n(centers.size());
  const DiskRule rule(opts.quad_points);
  parallel_for(centers.size(), [&](std::size_t k) { n[k] = frequency_ball(field, centers[k], rep.scale, rule); });
  rep.sup_small_scale_n = *std::max_element(n.begin(), n.end());
  rep.centers = static_cast<int>(centers.size());
  rep.violation = rep.sup_small_scale_n > 0.5;
  return rep;
}

SubadditivityReport quasi_subadditivity_check(const HoloField& field, double budget,
                                              SubadditivityOptions opts) {
  if (!(budget > 0.0) || !(opts.t > 0.0) || !(opts.C > 0.0)) {
    throw Error(ErrorKind::InvalidInput, "budget, t and C must be positive");
  }
  const Factorization fac = factor_in_disk(field);
  if (fac.poly_degree() != field.degree()) {
    throw Error(ErrorKind::InvalidInput, "all roots must lie in the unit disk");
  }
  SubadditivityReport rep;
  rep.budget = budget;
  rep.t = opts.t;
  rep.C = opts.C;
  const DiskRule rule(opts.quad_points);
  rep.n_field = frequency_ball(field, 0.0, 2.0 * opts.t, rule);
  rep.n_cofactor = frequency_ball(fac.cofactor, 0.0, opts.t, rule);
  rep.ratio = rep.n_field > 0.0 ? rep.n_cofactor / rep.n_field : 0.0;
  rep.violation = rep.n_cofactor > opts.C * budget;
  return rep;
}

nlohmann::json to_json(const LemmaRecord& r) {
  return {{"lemma", r.lemma}, {"inputs", r.inputs}, {"measured", r.measured},
          {"threshold", r.threshold}, {"pass", r.pass}};
}

LemmaRecord to_record(const NonvanishingReport& r, const HoloField& field) {
  LemmaRecord rec;
  rec.lemma = "nonvanishing-small-scale-frequency";
  rec.inputs = {{"field", to_json(field)}, {"budget", r.budget}, {"scale", r.scale}, {"centers", r.centers}};
  rec.measured = {{"n_unit", r.n_unit},
                  {"max_log_half", r.max_log_half},
                  {"max_log_half_raw", r.max_log_half_raw},
                  {"ratio", r.ratio},
                  {"sup_small_scale_n", r.sup_small_scale_n}};
  rec.threshold = 0.5;
  rec.pass = !r.violation;
  return rec;
}

LemmaRecord to_record(const SubadditivityReport& r, const HoloField& field) {
  LemmaRecord rec;
  rec.lemma = "quasi-subadditivity";
  rec.inputs = {{"field", to_json(field)}, {"budget", r.budget}, {"t", r.t}, {"C", r.C}};
  rec.measured = {{"n_field", r.n_field}, {"n_cofactor", r.n_cofactor}, {"ratio", r.ratio}};
  rec.threshold = r.C * r.budget;
  rec.pass = !r.violation;
  return rec;
}

}  // namespace harmgrad
