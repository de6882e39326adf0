#include "harmgrad/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include <boost/math/statistics/linear_regression.hpp>

#include "harmgrad/beltrami.hpp"
#include "harmgrad/drift_elliptic.hpp"
#include "harmgrad/factor_bounds.hpp"
#include "harmgrad/frequency.hpp"
#include "harmgrad/geometry.hpp"
#include "harmgrad/parallel.hpp"
#include "harmgrad/spectral.hpp"

namespace harmgrad {

std::string format_cell(const Cell& c) {
  char buf[64];
  if (const double* d = std::get_if<double>(&c)) {
    std::snprintf(buf, sizeof buf, "%.12g", *d);
    return buf;
  }
  if (const long long* n = std::get_if<long long>(&c)) {
    std::snprintf(buf, sizeof buf, "%lld", *n);
    return buf;
  }
  return std::get<std::string>(c);
}

void Table::add(const std::vector<Cell>& row) {
  if (row.size() != columns.size()) {
    throw Error(ErrorKind::InvalidInput, "table " + name + ": row width does not match the header");
  }
  std::vector<std::string> out;
  out.reserve(row.size());
  for (const Cell& c : row) out.push_back(format_cell(c));
  rows.push_back(std::move(out));
}

void Table::write_csv(std::ostream& os) const {
  for (std::size_t k = 0; k < columns.size(); ++k) os << (k ? "," : "") << columns[k];
  os << '\n';
  for (const auto& row : rows) {
    for (std::size_t k = 0; k < row.size(); ++k) os << (k ? "," : "") << row[k];
    os << '\n';
  }
}

nlohmann::json Table::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& row : rows) {
    nlohmann::json obj = nlohmann::json::object();
    for (std::size_t k = 0; k < row.size(); ++k) obj[columns[k]] = row[k];
    arr.push_back(std::move(obj));
  }
  return arr;
}

bool ExperimentReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

nlohmann::json ExperimentReport::to_json() const {
  nlohmann::json cj = nlohmann::json::array();
  for (const Check& c : checks) {
    cj.push_back({{"name", c.name},
                  {"pass", c.pass},
                  {"measured", c.measured},
                  {"threshold", c.threshold},
                  {"relation", c.relation},
                  {"detail", c.detail}});
  }
  nlohmann::json tables_j = nlohmann::json::array();
  for (const Table& t : tables) tables_j.push_back({{"name", t.name}, {"rows", t.rows.size()}});
  return {{"experiment", experiment}, {"pass", passed()}, {"checks", cj}, {"tables", tables_j}, {"summary", summary}};
}

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

std::uint64_t Rng::next() { return engine_(); }

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

int Rng::integer(int lo, int hi) {
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<int>(engine_() % span);
}

double Rng::normal() { return normal_(engine_); }

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  try {
    const auto [c0, c1, r2] = boost::math::statistics::simple_ordinary_least_squares_with_R_squared(x, y);
    return {c1, c0, r2};
  } catch (const std::domain_error& e) {
    throw Error(ErrorKind::Degenerate, std::string("line fit: ") + e.what());
  }
}

namespace {

Check at_most(std::string name, double measured, double threshold, std::string detail = {}) {
  return {std::move(name), measured <= threshold, measured, threshold, "<=", std::move(detail)};
}

Check at_least(std::string name, double measured, double threshold, std::string detail = {}) {
  return {std::move(name), measured >= threshold, measured, threshold, ">=", std::move(detail)};
}

Check below(std::string name, double measured, double threshold, std::string detail = {}) {
  return {std::move(name), measured < threshold, measured, threshold, "<", std::move(detail)};
}

std::vector<double> geometric_grid(double lo, double hi, int points) {
  std::vector<double> g(points);
  for (int k = 0; k < points; ++k) {
    g[k] = points == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(k) / (points - 1));
  }
  return g;
}

HoloField monomial(int d) { return make_field({{cplx(0.0), d}}, {cplx(0.0)}, 1.0); }

std::vector<Root> random_roots(Rng& rng, int n) {
  std::vector<Root> roots;
  for (int k = 0; k < n; ++k) {
    const double rad = std::sqrt(rng.uniform());
    roots.push_back({std::polar(rad, 2.0 * std::numbers::pi * rng.uniform()), 1});
  }
  return roots;
}

// ---------------------------------------------------------------- freq-scan

PreparedRun prepare_freq_scan(ParamReader& p, const RunContext& ctx) {
  const bool do_mono = p.get<bool>("monotonicity", true);
  const int vectors = p.count("vectors", 1000);
  const int scales = p.count("scales", 100, 2);
  const int terms_max = p.count("terms_max", 12);
  const double r_min = p.positive("r_min", 1e-3);
  const double r_max = p.positive("r_max", 1.0);
  const double tol = p.positive("tol", 1e-9);
  const bool do_quad = p.get<bool>("quadrature", true);
  const int samples = p.count("quad_samples", 100);
  const int quad_points = p.count("quad_points", 4096, kMinQuadPoints);
  const double quad_r_min = p.positive("quad_r_min", 0.01);
  const double quad_r_max = p.positive("quad_r_max", 0.5);
  const double quad_tol = p.positive("quad_tol", 1e-6);
  if (r_min >= r_max) p.fail("r_min", "must be below r_max");
  if (quad_r_min > quad_r_max) p.fail("quad_r_min", "must not exceed quad_r_max");

  return [=] {
    ExperimentReport rep;
    rep.experiment = "freq-scan";
    Rng rng(ctx.seed);
    auto draw = [&](int terms) {
      SeriesRep s;
      s.center = cplx(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
      for (int k = 0; k < terms; ++k) s.coeffs.push_back(rng.normal());
      return s;
    };

    Table mono{"monotonicity", {"vector", "terms", "violations", "min_step", "n_first", "n_last"}, {}};
    if (do_mono) {
      const std::vector<double> grid = geometric_grid(r_min, r_max, scales);
      std::vector<SeriesRep> reps;
      for (int v = 0; v < vectors; ++v) reps.push_back(draw(rng.integer(1, terms_max)));
      std::vector<std::size_t> violations(vectors);
      std::vector<double> min_step(vectors), first(vectors), last(vectors);
      parallel_for(
          vectors,
          [&](std::size_t v) {
            violations[v] = monotonicity_scan(reps[v], grid, tol).size();
            double prev = frequency_series(reps[v], grid[0]);
            first[v] = prev;
            double step = INFINITY;
            for (std::size_t k = 1; k < grid.size(); ++k) {
              const double n = frequency_series(reps[v], grid[k]);
              step = std::min(step, n - prev);
              prev = n;
            }
            min_step[v] = step;
            last[v] = prev;
          },
          ctx.jobs);
      std::size_t total = 0;
      double worst = INFINITY;
      for (int v = 0; v < vectors; ++v) {
        mono.add({static_cast<long long>(v), static_cast<long long>(reps[v].coeffs.size()),
                  static_cast<long long>(violations[v]), min_step[v], first[v], last[v]});
        total += violations[v];
        worst = std::min(worst, min_step[v]);
      }
      rep.checks.push_back(at_most("monotonicity-violations", static_cast<double>(total), 0.0,
                                   std::to_string(vectors) + " vectors x " + std::to_string(scales) + " scales"));
      rep.summary["monotonicity"] = {{"vectors", vectors}, {"scales", scales}, {"violations", total}, {"min_step", worst}};
    }
    rep.tables.push_back(std::move(mono));

    Table quad{"quadrature", {"sample", "terms", "center_re", "center_im", "r", "n_quadrature", "n_series", "abs_diff"}, {}};
    if (do_quad) {
      std::vector<SeriesRep> reps;
      std::vector<double> rs;
      for (int s = 0; s < samples; ++s) {
        reps.push_back(draw(rng.integer(1, terms_max)));
        rs.push_back(rng.uniform(quad_r_min, quad_r_max));
      }
      std::vector<double> nq(samples), ns(samples);
      parallel_for(
          samples,
          [&](std::size_t s) {
            nq[s] = frequency_ball(series_to_field(reps[s]), reps[s].center, rs[s], quad_points);
            ns[s] = frequency_series(reps[s], rs[s]);
          },
          ctx.jobs);
      double worst = 0.0;
      for (int s = 0; s < samples; ++s) {
        const double d = std::abs(nq[s] - ns[s]);
        worst = std::max(worst, d);
        quad.add({static_cast<long long>(s), static_cast<long long>(reps[s].coeffs.size()), reps[s].center.real(),
                  reps[s].center.imag(), rs[s], nq[s], ns[s], d});
      }
      rep.checks.push_back(at_most("quadrature-vs-series", worst, quad_tol,
                                   std::to_string(samples) + " series, quad_points " + std::to_string(quad_points)));
      rep.summary["quadrature"] = {{"samples", samples}, {"max_abs_diff", worst}};
    }
    rep.tables.push_back(std::move(quad));
    if (!do_mono) std::swap(rep.tables[0], rep.tables[1]);
    return rep;
  };
}

// --------------------------------------------------------------- superlevel

PreparedRun prepare_superlevel(ParamReader& p, const RunContext& ctx) {
  const std::vector<int> lambdas = p.count_list("lambdas", {4, 8, 16});
  const std::vector<double> factors = p.positive_list("scale_factors", {1.0 / 8, 1.0 / 16, 1.0 / 32});
  const double threshold = p.positive("threshold", 1.0);
  const double window_factor = p.positive("window_factor", 3.0);
  const double window_max = p.positive("window_max", 0.5);
  const int quad_points = p.count("quad_points", 256, kMinQuadPoints);
  const double slope_target = p.get<double>("slope_target", 2.0);
  const double slope_tol = p.positive("slope_tol", 0.1);
  const double spread = p.positive("spread", 10.0);
  if (factors.size() < 2) p.fail("scale_factors", "a slope needs at least two scales");

  return [=] {
    ExperimentReport rep;
    rep.experiment = "superlevel";
    Table main{"superlevel",
               {"lambda", "r", "threshold", "h", "area", "window_area", "perimeter_error", "cells", "hits",
                "degenerate", "window_radius", "normalized"},
               {}};
    Table fit{"fit", {"lambda", "slope", "intercept", "r2", "rows"}, {}};
    double worst_slope = 0.0;
    double lo = INFINITY, hi = 0.0;
    for (int lambda : lambdas) {
      const HoloField f = monomial(lambda);
      std::vector<double> lr, la;
      std::vector<double> sorted = factors;
      std::sort(sorted.begin(), sorted.end());
      for (double s : sorted) {
        const double r = s / lambda;
        const Window w{cplx(0.0), std::min(window_max, window_factor * lambda * r)};
        const SuperlevelResult res = superlevel_volume(f, r, threshold, w, 0.0, {quad_points, ctx.jobs});
        const double norm = res.area / (static_cast<double>(lambda) * lambda * r * r);
        main.add({static_cast<long long>(lambda), r, res.threshold, res.h, res.area, res.window_area,
                  res.perimeter_error, static_cast<long long>(res.cells), static_cast<long long>(res.hits),
                  static_cast<long long>(res.degenerate), w.radius, norm});
        if (res.area > 0.0) {
          lr.push_back(std::log(r));
          la.push_back(std::log(res.area));
        }
        lo = std::min(lo, norm);
        hi = std::max(hi, norm);
      }
      if (lr.size() < 2) throw Error(ErrorKind::Degenerate, "superlevel set empty at every scale");
      const LinearFit lf = fit_line(lr, la);
      fit.add({static_cast<long long>(lambda), lf.slope, lf.intercept, lf.r2, static_cast<long long>(lr.size())});
      worst_slope = std::max(worst_slope, std::abs(lf.slope - slope_target));
    }
    rep.checks.push_back(at_most("slope", worst_slope, slope_tol, "max |slope - " + format_cell(slope_target) + "| over lambdas"));
    const double ratio = lo > 0.0 ? hi / lo : INFINITY;
    rep.checks.push_back(at_most("normalized-spread", ratio, spread, "max/min of area / (lambda^2 r^2)"));
    rep.summary = {{"max_slope_deviation", worst_slope}, {"normalized_min", lo}, {"normalized_max", hi}};
    rep.tables.push_back(std::move(main));
    rep.tables.push_back(std::move(fit));
    return rep;
  };
}

// --------------------------------------------------------------- transition

PreparedRun prepare_transition(ParamReader& p, const RunContext& ctx) {
  const std::vector<int> lambdas = p.count_list("lambdas", {10, 20, 40});
  const double threshold = p.positive("threshold", 1.0);
  const double r_min = p.positive("r_min", 1e-3);
  const double r_max = p.positive("r_max", 0.5);
  const int per_octave = p.count("points_per_octave", 4);
  const double window_factor = p.positive("window_factor", 4.0);
  const int quad_points = p.count("quad_points", 256, kMinQuadPoints);
  const double factor = p.positive("factor", 8.0);
  if (r_min >= r_max) p.fail("r_min", "must be below r_max");

  return [=] {
    ExperimentReport rep;
    rep.experiment = "transition";
    const int points = static_cast<int>(std::ceil(std::log2(r_max / r_min) * per_octave)) + 1;
    const std::vector<double> grid = geometric_grid(r_min, r_max, points);
    Table main{"transition", {"lambda", "r", "window_radius", "h", "cells", "hits", "fraction", "state"}, {}};
    Table tr{"scale", {"lambda", "r_empty", "r_full", "r_transition", "lambda_r"}, {}};
    double lo = INFINITY, hi = 0.0;
    bool complete = true;
    for (int lambda : lambdas) {
      const HoloField f = make_field({}, {cplx(0.0), cplx(lambda)}, 1.0);
      double r_empty = NAN, r_full = NAN;
      for (double r : grid) {
        const Window w{cplx(0.0), window_factor * r};
        const SuperlevelResult res = superlevel_volume(f, r, threshold, w, 0.0, {quad_points, ctx.jobs});
        const double frac = res.cells ? static_cast<double>(res.hits) / res.cells : 0.0;
        const char* state = res.hits == 0 ? "empty" : (res.hits == res.cells ? "full" : "partial");
        if (res.hits == 0 && std::isnan(r_full)) r_empty = r;
        if (res.hits == res.cells && std::isnan(r_full)) r_full = r;
        main.add({static_cast<long long>(lambda), r, w.radius, res.h, static_cast<long long>(res.cells),
                  static_cast<long long>(res.hits), frac, std::string(state)});
      }
      const double rt = std::sqrt(r_empty * r_full);
      if (std::isnan(rt)) {
        complete = false;
      } else {
        lo = std::min(lo, lambda * rt);
        hi = std::max(hi, lambda * rt);
      }
      tr.add({static_cast<long long>(lambda), r_empty, r_full, rt, lambda * rt});
    }
    const double ratio = complete && lo > 0.0 ? hi / lo : INFINITY;
    rep.checks.push_back(at_most("lambda-r-transition-spread", ratio, factor,
                                 complete ? "max/min of lambda * r_transition" : "transition not bracketed by the r grid"));
    rep.summary = {{"lambda_r_min", lo}, {"lambda_r_max", hi}};
    rep.tables.push_back(std::move(main));
    rep.tables.push_back(std::move(tr));
    return rep;
  };
}

// ------------------------------------------------------------------- cartan

PreparedRun prepare_cartan(ParamReader& p, const RunContext& ctx) {
  const int polys = p.count("polynomials", 1000);
  const int degree_max = p.count("degree_max", 10);
  const double a_min = p.positive("a_min", 1.0);
  const double a_max = p.positive("a_max", 20.0);
  const std::vector<double> deltas = p.positive_list("deltas", {0.5, 1.0, 1.5});
  const int samples = p.count("samples", 2000);
  if (a_min > a_max) p.fail("a_min", "must not exceed a_max");

  return [=] {
    ExperimentReport rep;
    rep.experiment = "cartan";
    struct Trial {
      std::vector<Root> roots;
      double a = 0.0;
      double delta = 0.0;
      std::uint64_t seed = 0;
    };
    Rng rng(ctx.seed);
    std::vector<Trial> trials(polys);
    for (Trial& t : trials) {
      t.roots = random_roots(rng, rng.integer(1, degree_max));
      t.a = rng.uniform(a_min, a_max);
      t.delta = deltas[rng.integer(0, static_cast<int>(deltas.size()) - 1)];
      t.seed = rng.next();
    }
    std::vector<BallCover> covers(polys);
    std::vector<CoverCheck> checks(polys);
    parallel_for(
        polys,
        [&](std::size_t k) {
          covers[k] = cartan_cover(trials[k].roots, trials[k].a, trials[k].delta);
          checks[k] = verify_cover(trials[k].roots, trials[k].a, covers[k], samples, trials[k].seed);
        },
        ctx.jobs);
    Table main{"cartan", {"trial", "degree", "a", "delta", "balls", "content", "bound", "ratio", "samples", "in_set", "uncovered"}, {}};
    double worst = 0.0;
    std::size_t uncovered = 0, in_set = 0;
    for (int k = 0; k < polys; ++k) {
      const Trial& t = trials[k];
      const double n = static_cast<double>(t.roots.size());
      const double bound = std::exp(-t.a * t.delta / n);
      const double ratio = covers[k].content_stat / bound;
      worst = std::max(worst, ratio);
      uncovered += checks[k].uncovered;
      in_set += checks[k].in_set;
      main.add({static_cast<long long>(k), static_cast<long long>(t.roots.size()), t.a, t.delta,
                static_cast<long long>(covers[k].balls.size()), covers[k].content_stat, bound, ratio,
                static_cast<long long>(checks[k].samples), static_cast<long long>(checks[k].in_set),
                static_cast<long long>(checks[k].uncovered)});
    }
    rep.checks.push_back(at_most("content-bound", worst, ctx.constants.cartan, "max sum r^delta / e^{-a delta / n}"));
    rep.checks.push_back(at_most("uncovered-samples", static_cast<double>(uncovered), 0.0,
                                 std::to_string(in_set) + " sampled points of the sublevel sets"));
    rep.summary = {{"worst_ratio", worst}, {"constant", ctx.constants.cartan}, {"in_set", in_set}, {"uncovered", uncovered}};
    rep.tables.push_back(std::move(main));
    return rep;
  };
}

// ---------------------------------------------------------------- propagate

PreparedRun prepare_propagate(ParamReader& p, const RunContext&) {
  const std::vector<int> powers = p.count_list("powers", {2, 3, 4});
  const double rate = p.positive("rate", 4.0);
  const double a_per_power = p.positive("a_per_power", 2.0);
  const double delta = p.positive("delta", 1.0);
  const int grid = p.count("grid", 513, 3);
  const double stability = p.positive("stability", 0.1);

  return [=] {
    ExperimentReport rep;
    rep.experiment = "propagate";
    Table main{"propagate",
               {"power", "a", "delta", "grid", "log_max", "sup_half", "gamma", "beta", "beta_witness", "witness_re",
                "witness_im", "witness_radius", "set_cells", "vacuous"},
               {}};
    std::vector<double> gammas;
    double min_witness = INFINITY;
    double witness_excess = 0.0;
    for (int m : powers) {
      const HoloField f = make_field({{cplx(0.0), m}}, {cplx(0.0), cplx(rate * m)}, 1.0);
      const double a = a_per_power * m;
      const PropagationReport r = propagation_experiment(f, a, delta, grid);
      gammas.push_back(r.gamma);
      min_witness = std::min(min_witness, r.beta_witness);
      witness_excess = std::max(witness_excess, r.beta_witness / std::max(r.beta, 1e-300));
      main.add({static_cast<long long>(m), a, delta, static_cast<long long>(grid), r.log_max, r.sup_half, r.gamma, r.beta,
                r.beta_witness, r.witness.center.real(), r.witness.center.imag(), r.witness.radius,
                static_cast<long long>(r.set_cells), static_cast<long long>(r.vacuous)});
    }
    double mean = 0.0;
    for (double g : gammas) mean += g;
    mean /= static_cast<double>(gammas.size());
    double dev = 0.0;
    for (double g : gammas) dev = std::max(dev, std::abs(g / mean - 1.0));
    rep.checks.push_back(Check{"gamma-positive", *std::min_element(gammas.begin(), gammas.end()) > 0.0,
                               *std::min_element(gammas.begin(), gammas.end()), 0.0, ">", "min gamma"});
    rep.checks.push_back(at_most("gamma-stability", dev, stability, "max |gamma / mean - 1|"));
    rep.checks.push_back(Check{"witness", min_witness > 0.0, min_witness, 0.0, ">", "min witness_radius^delta"});
    rep.summary = {{"gamma_mean", mean}, {"gamma_max_relative_deviation", dev}, {"max_witness_over_beta", witness_excess}};
    rep.tables.push_back(std::move(main));
    return rep;
  };
}

// ----------------------------------------------------------------- beltrami

PreparedRun prepare_beltrami(ParamReader& p, const RunContext& ctx) {
  const double eta = ctx.constants.eta;
  const std::vector<double> etas = p.positive_list("etas", {eta / 4, eta / 2, eta});
  const int n = p.count("n", 1024, 16);
  const double L = p.get<double>("lipschitz", 1.0);
  const double half_factor = p.positive("half_width_factor", 2.2);
  const double tol = p.positive("tol", 1e-8);
  const double residual_tol = p.positive("residual_tol", 1e-6);
  const double r2_min = p.positive("r2_min", 0.95);
  if (half_factor <= 2.0) p.fail("half_width_factor", "the extension needs the grid to reach past 2 eta");
  if (etas.size() < 2) p.fail("etas", "linearity needs at least two radii");
  const double mu_max = ctx.constants.mu_max;

  return [=] {
    ExperimentReport rep;
    rep.experiment = "beltrami";
    Table main{"beltrami",
               {"eta", "n", "h", "sup_mu", "lipschitz_mu", "iterations", "residual", "fd_residual", "consistency",
                "sigma_sup", "min_modulus", "max_modulus", "nodes", "flagged"},
               {}};
    std::vector<double> xs, ys;
    double worst_res = 0.0;
    std::size_t flagged = 0;
    for (double e : etas) {
      const double half = half_factor * e;
      const double h = 2.0 * half / (n - 1);
      const MetricField g = sample_metric(
          [L](cplx z) { return std::array{1.0 + L * z.real(), L * (z.real() + z.imag()) / 4.0, 1.0 + L * z.imag() / 2.0}; },
          {-half, -half}, h, n, n);
      const ExtendedMu ext = extend_mu(mu_from_metric(g), e);
      BeltramiOptions opts;
      opts.tol = tol;
      opts.mu_max = mu_max;
      const BeltramiSolution sol = solve_beltrami(ext.mu, opts);
      const EigenReport eig = differential_check(sol, e);
      main.add({e, static_cast<long long>(n), h, ext.sup_extended, ext.lipschitz_extended,
                static_cast<long long>(sol.neumann_iters), sol.residual, sol.fd_residual, sol.consistency,
                sol.sigma_sup, eig.min_modulus, eig.max_modulus, static_cast<long long>(eig.nodes),
                static_cast<long long>(eig.flagged)});
      xs.push_back(e);
      ys.push_back(sol.sigma_sup);
      worst_res = std::max(worst_res, sol.residual);
      flagged += eig.flagged;
    }
    const LinearFit lf = fit_line(xs, ys);
    rep.checks.push_back(at_most("eigenvalue-moduli", static_cast<double>(flagged), 0.0, "nodes with modulus outside [1/2, 2]"));
    rep.checks.push_back(below("beltrami-residual", worst_res, residual_tol, "max |dbar omega - mu dz omega|"));
    rep.checks.push_back(at_least("sigma-linear-r2", lf.r2, r2_min, "sup|sigma| against eta"));
    rep.summary = {{"sigma_slope", lf.slope}, {"sigma_intercept", lf.intercept}, {"r2", lf.r2}, {"mu_max", mu_max}};
    rep.tables.push_back(std::move(main));
    return rep;
  };
}

// --------------------------------------------------------------- transforms

ComplexGridField disk_indicator(int n, double half, int sub) {
  const double h = 2.0 * half / n;
  ComplexGridField f({-half + 0.5 * h, -half + 0.5 * h}, h, n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const cplx z = f.node(i, j);
      if (std::abs(std::abs(z) - 1.0) > h) {
        f(i, j) = std::abs(z) < 1.0 ? 1.0 : 0.0;
        continue;
      }
      int in = 0;
      for (int a = 0; a < sub; ++a)
        for (int b = 0; b < sub; ++b)
          in += std::abs(z + cplx((a + 0.5) / sub - 0.5, (b + 0.5) / sub - 0.5) * h) < 1.0;
      f(i, j) = static_cast<double>(in) / (sub * sub);
    }
  }
  return f;
}

double banded_error(const ComplexGridField& got, bool beurling, double band) {
  double e = 0.0;
  for (std::size_t i = 0; i < got.nx(); ++i) {
    for (std::size_t j = 0; j < got.ny(); ++j) {
      const cplx z = got.node(i, j);
      const double r = std::abs(z);
      if (std::abs(r - 1.0) < band) continue;
      const cplx want = beurling ? (r < 1.0 ? cplx(0.0) : -1.0 / (z * z)) : (r < 1.0 ? std::conj(z) : 1.0 / z);
      e = std::max(e, std::abs(got(i, j) - want));
    }
  }
  return e;
}

PreparedRun prepare_transforms(ParamReader& p, const RunContext& ctx) {
  const std::vector<int> ns = p.count_list("ns", {256, 512, 1024}, 8);
  const double half = p.positive("half_width", 2.0);
  const double band = p.positive("band", 0.1);
  const int sub = p.count("subsamples", 32);
  const double order_min = p.positive("order_min", 0.9);
  const int trials = p.count("isometry_trials", 5);
  const int iso_n = p.count("isometry_n", 96, 8);
  const double iso_tol = p.positive("isometry_tol", 1e-10);
  if (ns.size() < 2) p.fail("ns", "an order needs at least two resolutions");
  if (half <= 1.0 + band) p.fail("half_width", "the grid must contain the disk and its band");

  return [=] {
    ExperimentReport rep;
    rep.experiment = "transforms";
    Table main{"transforms", {"n", "h", "cauchy_error", "beurling_error", "cauchy_order", "beurling_order"}, {}};
    std::vector<double> ec, es;
    double min_c = INFINITY, min_s = INFINITY;
    for (std::size_t k = 0; k < ns.size(); ++k) {
      const ComplexGridField f = disk_indicator(ns[k], half, sub);
      ec.push_back(banded_error(cauchy_transform(f), false, band));
      es.push_back(banded_error(beurling_transform(f), true, band));
      double oc = NAN, os = NAN;
      if (k > 0) {
        const double ratio = static_cast<double>(ns[k]) / ns[k - 1];
        oc = std::log(ec[k - 1] / ec[k]) / std::log(ratio);
        os = std::log(es[k - 1] / es[k]) / std::log(ratio);
        min_c = std::min(min_c, oc);
        min_s = std::min(min_s, os);
      }
      main.add({static_cast<long long>(ns[k]), f.spacing(), ec[k], es[k], oc, os});
    }
    rep.checks.push_back(at_least("cauchy-order", min_c, order_min, "banded max error, band " + format_cell(band)));
    rep.checks.push_back(at_least("beurling-order", min_s, order_min, "banded max error, band " + format_cell(band)));

    Table iso{"isometry", {"trial", "n", "l2_in", "l2_out", "deviation"}, {}};
    Rng rng(ctx.seed);
    double worst = 0.0;
    const double h = 4.0 / iso_n;
    for (int t = 0; t < trials; ++t) {
      ComplexGridField f({-2.0 + 0.5 * h, -2.0 + 0.5 * h}, h, iso_n, iso_n);
      for (int b = 0; b < 3; ++b) {
        const cplx c(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5));
        const double w = rng.uniform(0.01, 0.03);
        const cplx amp(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
        for (std::size_t i = 0; i < f.nx(); ++i)
          for (std::size_t j = 0; j < f.ny(); ++j) f(i, j) += amp * std::exp(-std::norm(f.node(i, j) - c) / w);
      }
      const ComplexGridField s = beurling_transform(f, {false, true});
      const double in = l2_norm(f), out = l2_norm(s);
      const double dev = std::abs(out / in - 1.0);
      worst = std::max(worst, dev);
      iso.add({static_cast<long long>(t), static_cast<long long>(iso_n), in, out, dev});
    }
    rep.checks.push_back(at_most("beurling-isometry", worst, iso_tol, "| ||Sf|| / ||f|| - 1 | on the periodic box"));
    rep.summary = {{"cauchy_min_order", min_c}, {"beurling_min_order", min_s}, {"isometry_deviation", worst}};
    rep.tables.push_back(std::move(main));
    rep.tables.push_back(std::move(iso));
    return rep;
  };
}

// -------------------------------------------------------------------- drift

DriftProblem exponential_problem(double k, double h) {
  DriftProblem p;
  p.h = h;
  p.drift = [k](cplx) { return std::array{k, 0.0}; };
  p.boundary = [k](cplx z) { return std::exp(-k * z.real()); };
  return p;
}

PreparedRun prepare_drift(ParamReader& p, const RunContext& ctx) {
  const std::vector<double> ks = p.positive_list("ks", {0.5, 1.0, 2.0});
  const std::vector<int> ns = p.count_list("ns", {16, 32, 64, 128}, 4);
  const double order_target = p.get<double>("order_target", 2.0);
  const double order_tol = p.positive("order_tol", 0.1);
  const std::vector<int> weak_ns = p.count_list("weak_ns", {64, 128, 256}, 8);
  const int weak_lambda = p.count("weak_lambda", 2);
  const double weak_strength = p.get<double>("weak_strength", 0.5);
  const double bump_radius = p.positive("bump_radius", 0.2);
  const double bump_reach = p.positive("bump_reach", 0.9);
  const double clearance = p.get<double>("clearance", 0.1);
  const double weak_order_min = p.positive("weak_order_min", 0.9);
  const std::vector<double> psi_ks = p.positive_list("psi_ks", {16.0, 20.0});
  const int psi_n = p.count("psi_n", 128, 8);
  const double epsilon = p.positive("epsilon", 0.5);
  const double small_scale_max = p.positive("small_scale_max", 0.75);
  const double reassembly_tol = p.positive("reassembly_tol", 1e-8);
  if (ns.size() < 2) p.fail("ns", "an order needs at least two resolutions");
  if (weak_ns.size() < 2) p.fail("weak_ns", "an order needs at least two resolutions");
  const double c_epsilon = ctx.constants.c_epsilon;

  return [=] {
    ExperimentReport rep;
    rep.experiment = "drift";
    Table conv{"convergence", {"k", "n", "h", "unknowns", "residual", "max_error", "order"}, {}};
    double worst_order = 0.0;
    for (double k : ks) {
      double prev = NAN;
      for (std::size_t q = 0; q < ns.size(); ++q) {
        const DriftProblem prob = exponential_problem(k, 1.0 / ns[q]);
        const DriftSolution s = solve_drift(prob);
        const double e = max_error(s, prob.boundary);
        double order = NAN;
        if (q > 0) {
          order = std::log(prev / e) / std::log(static_cast<double>(ns[q]) / ns[q - 1]);
          worst_order = std::max(worst_order, std::abs(order - order_target));
        }
        prev = e;
        conv.add({k, static_cast<long long>(ns[q]), prob.h, static_cast<long long>(s.unknowns), s.residual, e, order});
      }
    }
    rep.checks.push_back(at_most("convergence-order", worst_order, order_tol,
                                 "max |order - " + format_cell(order_target) + "| on e^{-kx}"));

    Table weak{"weak", {"n", "h", "bumps", "residual", "order", "zeros", "budget", "zeros_over_lambda", "reassembly"}, {}};
    double min_weak = INFINITY, worst_reassembly = 0.0, zero_ratio = 0.0;
    double prev = NAN;
    for (std::size_t q = 0; q < weak_ns.size(); ++q) {
      const DriftSolution s = solve_drift(power_drift_problem(weak_lambda, weak_strength, 1.0 / weak_ns[q]));
      const GradientLogField f = gradient_log_field(s);
      const std::vector<TestBump> bank = default_test_bank(f, bump_radius, bump_reach, clearance);
      if (bank.empty()) throw Error(ErrorKind::Degenerate, "no test bump clears the critical set");
      const double res = phi_weak_residual(s, f, bank);
      double order = NAN;
      if (q > 0) {
        order = std::log(prev / res) / std::log(static_cast<double>(weak_ns[q]) / weak_ns[q - 1]);
        min_weak = std::min(min_weak, order);
      }
      prev = res;
      int zeros = 0;
      for (const Root& r : f.zeros) zeros += r.multiplicity;
      const double budget = measured_budget(s);
      zero_ratio = std::max(zero_ratio, zeros / budget);
      worst_reassembly = std::max(worst_reassembly, f.reassembly);
      weak.add({static_cast<long long>(weak_ns[q]), 1.0 / weak_ns[q], static_cast<long long>(bank.size()), res, order,
                static_cast<long long>(zeros), budget, zeros / budget, f.reassembly});
    }
    rep.checks.push_back(at_least("weak-residual-order", min_weak, weak_order_min, "phi weak form on the power drift family"));

    Table psi{"psi",
              {"k", "n", "budget", "max_abs_psi", "ratio", "bmo", "scale", "max_small_scale_n", "sampled", "zeros", "reassembly"},
              {}};
    double worst_small = 0.0;
    for (double k : psi_ks) {
      const DriftSolution s = solve_drift(exponential_problem(k, 1.0 / psi_n));
      const GradientLogField f = gradient_log_field(s);
      const double budget = measured_budget(s);
      PsiOptions opts;
      opts.epsilon = epsilon;
      opts.c_epsilon = c_epsilon;
      opts.threshold = small_scale_max;
      const PsiReport r = psi_report(s, f, budget, opts);
      worst_small = std::max(worst_small, r.max_small_scale_n);
      worst_reassembly = std::max(worst_reassembly, f.reassembly);
      psi.add({k, static_cast<long long>(psi_n), r.budget, r.max_abs_psi, r.ratio, r.bmo, r.scale, r.max_small_scale_n,
               static_cast<long long>(r.sampled), static_cast<long long>(r.zero_count), f.reassembly});
    }
    rep.checks.push_back(at_most("psi-small-scale-frequency", worst_small, small_scale_max,
                                 "frequency of e^psi at scale c_eps / budget^{1+eps}"));
    rep.checks.push_back(at_most("reassembly", worst_reassembly, reassembly_tol, "max |phi - log P - psi|"));
    rep.summary = {{"max_order_deviation", worst_order},
                   {"min_weak_order", min_weak},
                   {"zero_count_constant", zero_ratio},
                   {"max_small_scale_n", worst_small},
                   {"c_epsilon", c_epsilon}};
    rep.tables.push_back(std::move(conv));
    rep.tables.push_back(std::move(weak));
    rep.tables.push_back(std::move(psi));
    return rep;
  };
}

// ----------------------------------------------------------------- identity

PreparedRun prepare_identity(ParamReader& p, const RunContext& ctx) {
  const int samples = p.count("samples", 1000000);
  const double range = p.positive("range", 10.0);
  const double tol = p.positive("tol", 1e-12);

  return [=] {
    ExperimentReport rep;
    rep.experiment = "identity";
    Rng rng(ctx.seed);
    std::map<int, long long> buckets;
    double worst = 0.0;
    for (int s = 0; s < samples; ++s) {
      double v[5];
      for (double& x : v) x = rng.uniform(-range, range);
      const double scale = appendix_identity_scale(v[0], v[1], v[2], v[3], v[4]);
      const double rel = scale > 0.0 ? std::abs(appendix_identity_residual(v[0], v[1], v[2], v[3], v[4])) / scale : 0.0;
      worst = std::max(worst, rel);
      buckets[rel > 0.0 ? static_cast<int>(std::floor(std::log10(rel))) : -100]++;
    }
    Table main{"identity", {"decade_lo", "decade_hi", "count"}, {}};
    for (const auto& [d, count] : buckets) {
      if (d == -100) {
        main.add({0.0, 0.0, count});
      } else {
        main.add({std::pow(10.0, d), std::pow(10.0, d + 1), count});
      }
    }
    rep.checks.push_back(at_most("relative-residual", worst, tol, std::to_string(samples) + " random 5-tuples"));
    rep.summary = {{"samples", samples}, {"max_relative_residual", worst}};
    rep.tables.push_back(std::move(main));
    return rep;
  };
}

// ---------------------------------------------------------- drift-superlevel

PreparedRun prepare_drift_superlevel(ParamReader& p, const RunContext& ctx) {
  const std::vector<int> lambdas = p.count_list("lambdas", {4, 8});
  const auto strengths = p.get<std::vector<double>>("strengths", {0.0, 0.05, 0.1, 0.25});
  const std::vector<double> rs = p.positive_list("rs", {1.0 / 32, 1.0 / 48, 1.0 / 64});
  const double threshold = p.positive("threshold", 1.0);
  const double epsilon = p.positive("epsilon", 0.5);
  const int n = p.count("n", 256, 8);
  const int corrections = p.count("corrections", 1, 0);
  const double window = p.positive("window_radius", 0.5);
  const int quad_points = p.count("quad_points", 256, kMinQuadPoints);
  const double harmonic_factor = p.positive("harmonic_factor", 2.0);
  const double continuity_factor = p.positive("continuity_factor", 4.0);
  for (double s : strengths) {
    if (!(s >= 0.0) || !std::isfinite(s)) p.fail("strengths", "entries must be finite and non-negative");
  }
  if (strengths.empty()) p.fail("strengths", "must not be empty");
  const double bound = ctx.constants.drift_area;

  return [=] {
    ExperimentReport rep;
    rep.experiment = "drift-superlevel";
    DriftSuperlevelOptions opts;
    opts.threshold = threshold;
    opts.epsilon = epsilon;
    opts.h = 1.0 / n;
    opts.corrections = corrections;
    opts.window = Window{cplx(0.0), window};
    opts.quad_points = quad_points;
    opts.jobs = ctx.jobs;
    const auto rows = drift_superlevel_experiment(lambdas, strengths, rs, opts);

    std::map<std::pair<int, double>, double> harmonic;
    Table ref{"harmonic", {"lambda", "r", "area", "harmonic_normalized"}, {}};
    for (int lambda : lambdas) {
      for (double r : rs) {
        const SuperlevelResult res = superlevel_volume(monomial(lambda), r, threshold, opts.window, 0.0, {quad_points, ctx.jobs});
        const double norm = res.area / (static_cast<double>(lambda) * lambda * r * r);
        harmonic[{lambda, r}] = norm;
        ref.add({static_cast<long long>(lambda), r, res.area, norm});
      }
    }

    Table main{"drift-superlevel",
               {"lambda", "strength", "r", "threshold", "h", "area", "normalized", "harmonic_normalized", "cells", "hits",
                "degenerate", "status"},
               {}};
    double sup = 0.0, worst_harmonic = 1.0;
    std::size_t failed = 0;
    std::map<int, double> per_lambda;
    std::map<std::tuple<int, double, double>, double> area;
    for (const DriftSuperlevelRow& row : rows) {
      main.add({static_cast<long long>(row.lambda), row.strength, row.r, threshold, row.scan.h, row.area, row.normalized,
                row.harmonic_normalized, static_cast<long long>(row.scan.cells), static_cast<long long>(row.scan.hits),
                static_cast<long long>(row.scan.degenerate), std::string(row.failed ? "failed" : "ok")});
      if (row.failed) {
        ++failed;
        continue;
      }
      sup = std::max(sup, row.normalized);
      per_lambda[row.lambda] = std::max(per_lambda[row.lambda], row.normalized);
      area[{row.lambda, row.strength, row.r}] = row.area;
      if (row.strength == 0.0) {
        const double h = harmonic.at({row.lambda, row.r});
        const double f = row.harmonic_normalized > 0.0 && h > 0.0
                             ? std::max(row.harmonic_normalized / h, h / row.harmonic_normalized)
                             : INFINITY;
        worst_harmonic = std::max(worst_harmonic, f);
      }
    }
    double increase = 0.0;
    for (auto it = per_lambda.begin(); it != per_lambda.end() && std::next(it) != per_lambda.end(); ++it) {
      increase = std::max(increase, std::next(it)->second / it->second);
    }

    rep.checks.push_back(at_most("failed-rows", static_cast<double>(failed), 0.0, "solver or scan errors"));
    rep.checks.push_back(at_most("normalized-bound", sup, bound, "sup of area / (lambda^{2+eps} r^2)"));
    if (per_lambda.size() > 1) {
      rep.checks.push_back(at_most("lambda-trend", increase, 1.0, "max ratio of per-lambda suprema, consecutive lambdas"));
    }
    if (std::find(strengths.begin(), strengths.end(), 0.0) != strengths.end()) {
      rep.checks.push_back(at_most("zero-drift-vs-harmonic", worst_harmonic, harmonic_factor,
                                   "max factor between b = 0 rows and the harmonic z^lambda areas"));
      double smallest = INFINITY;
      for (double s : strengths) {
        if (s > 0.0) smallest = std::min(smallest, s);
      }
      if (std::isfinite(smallest)) {
        const double r = *std::max_element(rs.begin(), rs.end());
        double worst = 1.0;
        for (int lambda : lambdas) {
          const auto a0 = area.find({lambda, 0.0, r});
          const auto a1 = area.find({lambda, smallest, r});
          if (a0 == area.end() || a1 == area.end()) continue;
          worst = std::max(worst, a0->second > 0.0 && a1->second > 0.0
                                      ? std::max(a0->second / a1->second, a1->second / a0->second)
                                      : INFINITY);
        }
        rep.checks.push_back(at_most("small-drift-continuity", worst, continuity_factor,
                                     "area factor against b = 0 at strength " + format_cell(smallest) + ", r " + format_cell(r)));
      }
    }
    rep.summary = {{"normalized_sup", sup}, {"bound", bound}, {"zero_drift_factor", worst_harmonic}, {"failed_rows", failed}};
    nlohmann::json pl = nlohmann::json::object();
    for (const auto& [l, v] : per_lambda) pl[std::to_string(l)] = v;
    rep.summary["per_lambda_sup"] = pl;
    rep.tables.push_back(std::move(main));
    rep.tables.push_back(std::move(ref));
    return rep;
  };
}

// ------------------------------------------------------------- nonvanishing

PreparedRun prepare_nonvanishing(ParamReader& p, const RunContext& ctx) {
  const int fields = p.count("fields", 50);
  const int exp_degree_max = p.count("exp_degree_max", 3);
  const double amplitude = p.positive("amplitude", 8.0);
  const int roots_max = p.count("roots_max", 6);
  const int center_grid = p.count("center_grid", 32);
  const double ratio_max = p.positive("ratio_max", 10.0);
  const double small_scale_max = p.positive("small_scale_max", 0.5);
  const Constants k = ctx.constants;

  return [=] {
    ExperimentReport rep;
    rep.experiment = "nonvanishing";
    Rng rng(ctx.seed);
    struct Input {
      HoloField nonvanishing;
      HoloField with_zeros;
    };
    std::vector<Input> inputs;
    for (int q = 0; q < fields; ++q) {
      std::vector<cplx> poly{cplx(0.0)};
      const int d = rng.integer(1, exp_degree_max);
      const double amp = rng.uniform(1.0, amplitude);
      for (int j = 1; j <= d; ++j) poly.emplace_back(amp * rng.normal() / j, amp * rng.normal() / j);
      std::vector<Root> roots = random_roots(rng, rng.integer(1, roots_max));
      inputs.push_back({make_field({}, poly, 1.0), make_field(std::move(roots), {cplx(0.0), poly[1]}, 1.0)});
    }
    std::vector<NonvanishingReport> nv(fields);
    std::vector<SubadditivityReport> sa(fields);
    parallel_for(
        fields,
        [&](std::size_t q) {
          NonvanishingOptions o;
          o.c = k.c;
          o.center_grid = center_grid;
          const double n_unit = frequency_ball(inputs[q].nonvanishing, 0.0, 1.0, 4096);
          nv[q] = nonvanishing_report(inputs[q].nonvanishing, std::max(1.0, n_unit) * (1.0 + 1e-9), o);
          SubadditivityOptions s;
          s.t = k.t;
          s.C = k.C;
          const double budget = std::max(1.0, frequency_ball(inputs[q].with_zeros, 0.0, 2.0 * k.t, 4096));
          sa[q] = quasi_subadditivity_check(inputs[q].with_zeros, budget, s);
        },
        ctx.jobs);
    Table main{"nonvanishing",
               {"field", "exp_degree", "budget", "n_unit", "max_log_half", "ratio", "scale", "sup_small_scale_n",
                "n_field", "n_cofactor", "cofactor_over_budget", "subadditivity_violation"},
               {}};
    double worst_ratio = 0.0, worst_small = 0.0, worst_sub = 0.0;
    std::size_t violations = 0;
    for (int q = 0; q < fields; ++q) {
      const double cb = sa[q].n_cofactor / sa[q].budget;
      worst_ratio = std::max(worst_ratio, nv[q].ratio);
      worst_small = std::max(worst_small, nv[q].sup_small_scale_n);
      worst_sub = std::max(worst_sub, cb);
      violations += sa[q].violation;
      main.add({static_cast<long long>(q), static_cast<long long>(inputs[q].nonvanishing.exp_poly().size() - 1), nv[q].budget,
                nv[q].n_unit, nv[q].max_log_half, nv[q].ratio, nv[q].scale, nv[q].sup_small_scale_n, sa[q].n_field,
                sa[q].n_cofactor, cb, static_cast<long long>(sa[q].violation)});
    }
    rep.checks.push_back(at_most("log-size-ratio", worst_ratio, ratio_max, "max |log|F|| on B_1/2 over the budget"));
    rep.checks.push_back(at_most("small-scale-frequency", worst_small, small_scale_max, "sup N(x, c / budget)"));
    rep.checks.push_back(at_most("subadditivity", worst_sub, k.C, "N_g(0, t) / budget"));
    rep.summary = {{"max_ratio", worst_ratio}, {"max_small_scale_n", worst_small}, {"max_cofactor_ratio", worst_sub},
                   {"violations", violations}, {"constants", k.to_json()}};
    rep.tables.push_back(std::move(main));
    return rep;
  };
}

// ----------------------------------------------------------------- registry

using Preparer = PreparedRun (*)(ParamReader&, const RunContext&);

struct Entry {
  ExperimentInfo info;
  Preparer prepare;
};

const std::vector<Entry>& registry() {
  static const std::vector<Entry> entries{
      {{"freq-scan", "Series frequency over random coefficient vectors and scales; quadrature against the closed form",
        "frequency is nondecreasing in the scale; disk quadrature reproduces the series frequency", {1, 2}},
       prepare_freq_scan},
      {{"superlevel", "Area of the frequency superlevel set for z^Lambda over a scale sweep, with a log-log slope fit",
        "superlevel area is at most quadratic in the scale, sharp for monomials", {3}},
       prepare_superlevel},
      {{"transition", "Empty-to-full transition of the superlevel set of exp(Lambda z) as the scale grows",
        "for exponentials the superlevel set switches on at scale ~ 1/Lambda", {4}},
       prepare_transition},
      {{"cartan", "Cartan covers of polynomial sublevel sets with rejection-sampled coverage",
        "sum r^delta <= C e^{-a delta / n} for the sublevel set of a monic polynomial", {5}},
       prepare_cartan},
      {{"propagate", "Smallness propagation exponent for the (z e^{4z})^m family",
        "smallness on a set of positive content propagates to B_1/2", {6}},
       prepare_propagate},
      {{"beltrami", "Isothermal coordinates for an affine metric at several radii",
        "the isothermal map has a differential with eigenvalue moduli in [1/2, 2] and log-derivative O(eta)", {7}},
       prepare_beltrami},
      {{"transforms", "Cauchy and Beurling transforms of the disk indicator under refinement, Beurling isometry",
        "spectral singular integrals match their closed forms at first order", {8}},
       prepare_transforms},
      {{"drift", "Drift solver convergence, weak form of the log-gradient equation, psi bounds",
        "the log-gradient of a drift solution splits into zeros plus a bounded, slowly varying part", {9}},
       prepare_drift},
      {{"identity", "Gradient-Hessian algebraic identity on random 5-tuples",
        "the pointwise identity behind the log-gradient estimate", {10}},
       prepare_identity},
      {{"drift-superlevel", "Frequency superlevel areas of drift solutions against the harmonic z^Lambda areas",
        "superlevel area <= C Lambda^{2+eps} r^2 for solutions with drift", {11}},
       prepare_drift_superlevel},
      {{"nonvanishing", "Log-size and small-scale frequency of nonvanishing gradients; cofactor frequency",
        "nonvanishing gradients are controlled by the budget; dividing out zeros costs a constant factor", {}},
       prepare_nonvanishing},
  };
  return entries;
}

}  // namespace

const std::vector<ExperimentInfo>& experiment_catalog() {
  static const std::vector<ExperimentInfo> infos = [] {
    std::vector<ExperimentInfo> v;
    for (const Entry& e : registry()) v.push_back(e.info);
    return v;
  }();
  return infos;
}

nlohmann::json catalog_json() {
  nlohmann::json arr = nlohmann::json::array();
  for (const ExperimentInfo& i : experiment_catalog()) {
    arr.push_back({{"name", i.name}, {"description", i.description}, {"verifies", i.verifies}, {"criteria", i.criteria}});
  }
  arr.push_back({{"name", "all"},
                 {"description", "Every experiment above, params keyed by experiment name"},
                 {"verifies", "everything above"},
                 {"criteria", nlohmann::json::array()}});
  return arr;
}

PreparedRun prepare_experiment(const std::string& name, const nlohmann::json& params, const RunContext& ctx) {
  for (const Entry& e : registry()) {
    if (e.info.name != name) continue;
    ParamReader reader(params, "params");
    PreparedRun run = e.prepare(reader, ctx);
    reader.finish();
    return run;
  }
  throw Error(ErrorKind::ConfigInvalid, "unknown experiment '" + name + "'");
}

ExperimentReport run_experiment(const std::string& name, const nlohmann::json& params, const RunContext& ctx) {
  return prepare_experiment(name, params, ctx)();
}

std::vector<std::pair<std::string, PreparedRun>> prepare_config(const ExperimentConfig& cfg) {
  const RunContext ctx{cfg.seed, cfg.jobs, cfg.constants};
  std::vector<std::pair<std::string, PreparedRun>> out;
  if (cfg.experiment != "all") {
    out.emplace_back(cfg.experiment, prepare_experiment(cfg.experiment, cfg.params, ctx));
    return out;
  }
  ParamReader per(cfg.params, "params");
  for (const ExperimentInfo& info : experiment_catalog()) {
    const auto sub = per.get<nlohmann::json>(info.name, nlohmann::json::object());
    ParamReader reader(sub, "params." + info.name);
    PreparedRun run;
    for (const Entry& e : registry()) {
      if (e.info.name == info.name) run = e.prepare(reader, ctx);
    }
    reader.finish();
    out.emplace_back(info.name, std::move(run));
  }
  per.finish();
  return out;
}

void write_report(const ExperimentReport& report, const std::filesystem::path& dir, OutputFormat format,
                  const nlohmann::json& run_info) {
  std::filesystem::create_directories(dir);
  auto open = [](const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error(ErrorKind::InvalidInput, "cannot write " + path.string());
    return os;
  };
  for (std::size_t k = 0; k < report.tables.size(); ++k) {
    const Table& t = report.tables[k];
    const std::string stem = k == 0 ? report.experiment : report.experiment + "_" + t.name;
    if (format == OutputFormat::Csv) {
      auto os = open(dir / (stem + ".csv"));
      t.write_csv(os);
    } else {
      auto os = open(dir / (stem + ".json"));
      os << t.to_json().dump(2) << '\n';
    }
  }
  nlohmann::json j = report.to_json();
  j["run"] = run_info;
  auto os = open(dir / (report.experiment + "_summary.json"));
  os << j.dump(2) << '\n';
}

}  // namespace harmgrad
