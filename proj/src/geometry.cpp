#include "harmgrad/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>

#include "harmgrad/frequency.hpp"
#include "harmgrad/parallel.hpp"

namespace harmgrad {

double BallCover::recompute() const {
  double s = 0.0;
  for (const Ball& b : balls) s += std::pow(b.radius, delta);
  return s;
}

bool BallCover::covers(cplx z) const {
  return std::any_of(balls.begin(), balls.end(), [z](const Ball& b) { return std::abs(z - b.center) < b.radius; });
}

nlohmann::json to_json(const BallCover& cover) {
  nlohmann::json balls = nlohmann::json::array();
  for (const Ball& b : cover.balls) balls.push_back({b.center.real(), b.center.imag(), b.radius});
  return {{"delta", cover.delta}, {"content", cover.content_stat}, {"balls", balls}};
}

double Window::area() const { return std::numbers::pi * radius * radius; }

namespace {

using FrequencyAt = std::function<double(cplx)>;

SuperlevelResult scan(const FrequencyAt& freq, double r, double threshold, Window w, double h,
                      unsigned jobs) {
  if (!(r > 0.0) || !(w.radius > 0.0)) throw Error(ErrorKind::InvalidInput, "scale and window must be positive");
  if (h == 0.0) h = r / 4.0;
  if (!(h > 0.0)) throw Error(ErrorKind::InvalidInput, "grid spacing must be positive");
  if (h > r / 4.0 * (1.0 + 1e-12)) throw Error(ErrorKind::Resolution, "grid spacing exceeds r/4");

  const auto m = static_cast<std::size_t>(std::ceil(2.0 * w.radius / h));
  if (m * m > kDefaultMaxNodes) throw Error(ErrorKind::GridTooLarge, "superlevel scan grid too large");
  const cplx first = w.center - cplx(1.0, 1.0) * (0.5 * static_cast<double>(m) * h - 0.5 * h);
  auto centre = [&](std::size_t i, std::size_t j) {
    return first + cplx(static_cast<double>(i) * h, static_cast<double>(j) * h);
  };
  // 0 outside window, 1 below threshold, 2 above, 3 degenerate
  std::vector<std::uint8_t> state(m * m, 0);
  parallel_for(m * m, [&](std::size_t idx) {
    const cplx x = centre(idx / m, idx % m);
    if (std::abs(x - w.center) >= w.radius) return;
    try {
      state[idx] = freq(x) > threshold ? 2 : 1;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Degenerate) throw;
      state[idx] = 3;
    }
  }, jobs);

  SuperlevelResult out;
  out.threshold = threshold;
  out.r = r;
  out.h = h;
  std::size_t edge = 0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      const std::uint8_t s = state[i * m + j];
      if (s == 0) continue;
      ++out.cells;
      if (s == 2) ++out.hits;
      if (s == 3) ++out.degenerate;
      bool differs = false;
      auto check = [&](std::size_t a, std::size_t b) {
        const std::uint8_t t = state[a * m + b];
        if (t != 0 && (t == 2) != (s == 2)) differs = true;
      };
      if (i > 0) check(i - 1, j);
      if (i + 1 < m) check(i + 1, j);
      if (j > 0) check(i, j - 1);
      if (j + 1 < m) check(i, j + 1);
      if (differs) ++edge;
    }
  }
  const double cell = h * h;
  out.area = cell * static_cast<double>(out.hits);
  out.window_area = cell * static_cast<double>(out.cells);
  out.perimeter_error = cell * static_cast<double>(edge);
  return out;
}

}  // namespace

SuperlevelResult superlevel_volume(const HoloField& field, double r, double threshold, Window window,
                                   double h, SuperlevelOptions opts) {
  const DiskRule rule(std::max(opts.quad_points, kMinQuadPoints));
  return scan([&](cplx x) { return frequency_ball(field, x, r, rule); }, r, threshold, window, h, opts.jobs);
}

SuperlevelResult superlevel_volume(const LogDensity& log_density, double r, double threshold, Window window,
                                   double h, SuperlevelOptions opts) {
  const DiskRule rule(std::max(opts.quad_points, kMinQuadPoints));
  return scan([&](cplx x) { return frequency_with(log_density, x, r, rule); }, r, threshold, window, h,
              opts.jobs);
}

double weak_l2_quasinorm(std::span<const double> values, double region_area, std::size_t min_count) {
  if (values.empty()) throw Error(ErrorKind::InvalidInput, "weak-L2 estimate needs samples");
  if (!(region_area > 0.0)) throw Error(ErrorKind::InvalidInput, "region area must be positive");
  std::vector<double> v(values.begin(), values.end());
  for (double x : v) {
    if (!(x >= 0.0) || !std::isfinite(x)) throw Error(ErrorKind::InvalidInput, "values must be finite and >= 0");
  }
  std::sort(v.begin(), v.end(), std::greater<>());
  const double n = static_cast<double>(v.size());
  double best = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    // the level v[k] is attained by every sample up to the last tie
    if (k + 1 < v.size() && v[k + 1] == v[k]) continue;
    const std::size_t count = k + 1;
    if (count < min_count) continue;
    best = std::max(best, v[k] * std::sqrt(static_cast<double>(count) / n * region_area));
  }
  return best;
}

namespace {

struct DiskPick {
  cplx center;
  std::vector<std::size_t> members;
};

// Largest member set of a closed disk of radius rho, over disks through one or two points.
DiskPick best_disk(const std::vector<cplx>& pts, double rho) {
  const double reach = rho * (1.0 + 1e-12) + 1e-15;
  DiskPick best;
  auto consider = [&](cplx c) {
    std::vector<std::size_t> in;
    for (std::size_t k = 0; k < pts.size(); ++k) {
      if (std::abs(pts[k] - c) <= reach) in.push_back(k);
    }
    if (in.size() > best.members.size()) best = {c, std::move(in)};
  };
  for (const cplx& p : pts) consider(p);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const cplx d = pts[j] - pts[i];
      const double len = std::abs(d);
      if (len == 0.0 || len > 2.0 * rho) continue;
      const cplx mid = 0.5 * (pts[i] + pts[j]);
      const double off = std::sqrt(std::max(0.0, rho * rho - 0.25 * len * len));
      const cplx normal = cplx(-d.imag(), d.real()) / len;
      consider(mid + off * normal);
      consider(mid - off * normal);
    }
  }
  return best;
}

}  // namespace

BallCover cartan_cover(std::span<const Root> roots, double a, double delta) {
  if (!(a > 0.0) || !(delta > 0.0)) throw Error(ErrorKind::InvalidInput, "a and delta must be positive");
  std::vector<cplx> pts;
  for (const Root& r : roots) {
    if (r.multiplicity < 1) throw Error(ErrorKind::InvalidInput, "root multiplicity must be >= 1");
    pts.insert(pts.end(), static_cast<std::size_t>(r.multiplicity), r.position);
  }
  if (pts.empty()) throw Error(ErrorKind::InvalidInput, "cartan_cover needs at least one root");
  const double n = static_cast<double>(pts.size());

  BallCover cover;
  cover.delta = delta;
  const bool single = std::all_of(pts.begin(), pts.end(), [&](cplx p) { return p == pts.front(); });
  if (single) {
    // the set is exactly the open disk |z - z_0| < e^{-a/n}
    cover.balls.push_back({pts.front(), std::exp(-a / n)});
  } else {
    const double H = std::numbers::e * std::exp(-a / n);
    while (!pts.empty()) {
      for (std::size_t k = pts.size(); k >= 1; --k) {
        const double rho = static_cast<double>(k) * H / n;
        DiskPick pick = best_disk(pts, rho);
        if (pick.members.size() < k) continue;
        cover.balls.push_back({pick.center, 2.0 * rho});
        std::vector<cplx> rest;
        std::size_t m = 0;
        for (std::size_t q = 0; q < pts.size(); ++q) {
          if (m < pick.members.size() && pick.members[m] == q) {
            ++m;
          } else {
            rest.push_back(pts[q]);
          }
        }
        pts = std::move(rest);
        break;
      }
    }
  }
  cover.content_stat = cover.recompute();
  return cover;
}

CoverCheck verify_cover(std::span<const Root> roots, double a, const BallCover& cover, std::size_t samples,
                        std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto in_disk = [&](cplx c, double radius) {
    return c + std::polar(radius * std::sqrt(unit(rng)), 2.0 * std::numbers::pi * unit(rng));
  };
  CoverCheck out;
  for (std::size_t s = 0; s < samples; ++s) {
    cplx z;
    if (s % 2 == 0 || cover.balls.empty()) {
      z = in_disk(0.0, 1.0);
    } else {
      const Ball& b = cover.balls[static_cast<std::size_t>(unit(rng) * cover.balls.size()) % cover.balls.size()];
      z = in_disk(b.center, 1.25 * b.radius);
    }
    ++out.samples;
    if (std::abs(z) >= 1.0) continue;
    double log_p = 0.0;
    for (const Root& r : roots) log_p += r.multiplicity * std::log(std::abs(z - r.position));
    if (!(log_p < -a)) continue;
    ++out.in_set;
    if (!cover.covers(z)) ++out.uncovered;
  }
  return out;
}

namespace {

struct DyadicCover {
  const MaskGrid& mask;
  double delta;
  std::vector<std::uint64_t> prefix;  // (nx + 1) x (ny + 1)
  std::vector<Ball>* balls = nullptr;

  explicit DyadicCover(const MaskGrid& m, double d) : mask(m), delta(d), prefix((m.nx() + 1) * (m.ny() + 1), 0) {
    const std::size_t w = m.ny() + 1;
    for (std::size_t i = 0; i < m.nx(); ++i) {
      for (std::size_t j = 0; j < m.ny(); ++j) {
        prefix[(i + 1) * w + j + 1] =
            (m(i, j) != 0) + prefix[i * w + j + 1] + prefix[(i + 1) * w + j] - prefix[i * w + j];
      }
    }
  }

  std::uint64_t occupied(std::size_t i0, std::size_t j0, std::size_t s) const {
    const std::size_t i1 = std::min(i0 + s, mask.nx());
    const std::size_t j1 = std::min(j0 + s, mask.ny());
    if (i0 >= i1 || j0 >= j1) return 0;
    const std::size_t w = mask.ny() + 1;
    return prefix[i1 * w + j1] - prefix[i0 * w + j1] - prefix[i1 * w + j0] + prefix[i0 * w + j0];
  }

  Ball ball(std::size_t i0, std::size_t j0, std::size_t s) const {
    const double h = mask.spacing();
    const double half = 0.5 * static_cast<double>(s) * h;
    const cplx corner = mask.origin() - cplx(0.5 * h, 0.5 * h) +
                        cplx(static_cast<double>(i0) * h, static_cast<double>(j0) * h);
    return {corner + cplx(half, half), half * std::numbers::sqrt2};
  }

  // returns (cost, squares); appends the chosen balls when requested
  std::pair<double, std::size_t> solve(std::size_t i0, std::size_t j0, std::size_t s, bool emit) const {
    if (occupied(i0, j0, s) == 0) return {0.0, 0};
    const double own = std::pow(ball(i0, j0, s).radius, delta);
    if (s == 1) {
      if (emit) balls->push_back(ball(i0, j0, s));
      return {own, 1};
    }
    const std::size_t t = s / 2;
    double sum = 0.0;
    std::size_t count = 0;
    for (auto [di, dj] : {std::pair<std::size_t, std::size_t>{0, 0}, {t, 0}, {0, t}, {t, t}}) {
      const auto [c, k] = solve(i0 + di, j0 + dj, t, false);
      sum += c;
      count += k;
    }
    if (own <= sum) {
      if (emit) balls->push_back(ball(i0, j0, s));
      return {own, 1};
    }
    if (emit) {
      for (auto [di, dj] : {std::pair<std::size_t, std::size_t>{0, 0}, {t, 0}, {0, t}, {t, t}}) {
        solve(i0 + di, j0 + dj, t, true);
      }
    }
    return {sum, count};
  }

  std::size_t side() const {
    std::size_t s = 1;
    while (s < mask.nx() || s < mask.ny()) s *= 2;
    return s;
  }
};

}  // namespace

ContentEstimate hausdorff_content_upper(const MaskGrid& mask, double delta) {
  if (!(delta > 0.0)) throw Error(ErrorKind::InvalidInput, "delta must be positive");
  const DyadicCover dc(mask, delta);
  ContentEstimate out;
  const auto [cost, squares] = dc.solve(0, 0, dc.side(), false);
  out.content = cost;
  out.squares = squares;
  return out;
}

BallCover hausdorff_cover(const MaskGrid& mask, double delta) {
  if (!(delta > 0.0)) throw Error(ErrorKind::InvalidInput, "delta must be positive");
  DyadicCover dc(mask, delta);
  BallCover cover;
  cover.delta = delta;
  dc.balls = &cover.balls;
  dc.solve(0, 0, dc.side(), true);
  cover.content_stat = cover.recompute();
  return cover;
}

PropagationReport propagation_experiment(const HoloField& field, double a, double delta, int grid) {
  if (!(a > 0.0) || !(delta > 0.0) || grid < 3) {
    throw Error(ErrorKind::InvalidInput, "need a > 0, delta > 0 and grid >= 3");
  }
  const auto n = static_cast<std::size_t>(grid);
  const double h = 2.0 / static_cast<double>(grid - 1);
  RealGridField log_abs({-1.0, -1.0}, h, n, n, -std::numeric_limits<double>::infinity());
  parallel_for(n * n, [&](std::size_t idx) {
    const std::size_t i = idx / n;
    const std::size_t j = idx % n;
    const cplx z = log_abs.node(i, j);
    if (std::abs(z) <= 1.0) log_abs(i, j) = 0.5 * field.log_abs2(z);
  });
  double log_max = -std::numeric_limits<double>::infinity();
  for (double v : log_abs.values()) log_max = std::max(log_max, v);
  if (!std::isfinite(log_max)) throw Error(ErrorKind::Normalization, "field vanishes on every grid node");

  PropagationReport rep;
  rep.a = a;
  rep.delta = delta;
  rep.grid = grid;
  rep.log_max = log_max;
  MaskGrid mask = log_abs.like<std::uint8_t>(0);
  double log_sup_half = -std::numeric_limits<double>::infinity();
  std::size_t deepest = n * n;
  double deepest_value = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const cplx z = log_abs.node(i, j);
      if (std::abs(z) > 1.0) continue;
      const double v = log_abs(i, j) - log_max;
      if (std::abs(z) <= 0.5) log_sup_half = std::max(log_sup_half, v);
      if (v < -a && std::abs(z) < 1.0) {
        mask(i, j) = 1;
        ++rep.set_cells;
        if (v < deepest_value) {
          deepest_value = v;
          deepest = i * n + j;
        }
      }
    }
  }
  rep.sup_half = std::exp(log_sup_half);
  rep.gamma = log_sup_half < 0.0 ? -log_sup_half / a : 0.0;
  rep.vacuous = rep.set_cells == 0;
  if (rep.vacuous) return rep;
  rep.beta = hausdorff_content_upper(mask, delta).content;

  // witness: largest disk around the deepest node whose boundary circle stays in E_a
  const cplx x0 = log_abs.node(deepest / n, deepest % n);
  auto inside = [&](double rho) {
    constexpr int kSamples = 512;
    for (int k = 0; k < kSamples; ++k) {
      const cplx z = x0 + std::polar(rho, 2.0 * std::numbers::pi * k / kSamples);
      if (!(0.5 * field.log_abs2(z) - log_max < -a)) return false;
    }
    return true;
  };
  double lo = 0.0;
  double hi = 1.0 - std::abs(x0);
  if (inside(hi)) {
    lo = hi;
  } else {
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (inside(mid) ? lo : hi) = mid;
    }
  }
  rep.witness = {x0, lo};
  rep.beta_witness = std::pow(rep.witness.radius, delta);
  return rep;
}

MaskGrid effective_critical_mask(const HoloField& field, double r, double C, cplx origin, double h,
                                 std::size_t nx, std::size_t ny) {
  if (!(r > 0.0) || !(C > 0.0)) throw Error(ErrorKind::InvalidInput, "r and C must be positive");
  MaskGrid mask(origin, h, nx, ny, 0);
  const GaussLegendre gl = gauss_legendre(16);
  constexpr int kBoundary = 64;
  constexpr int kInner = 256;
  parallel_for(nx * ny, [&](std::size_t idx) {
    const cplx x = mask.node(idx / ny, idx % ny);
    double inf_grad2 = std::numeric_limits<double>::infinity();
    for (const Root& z : field.roots()) {
      if (std::abs(z.position - x) <= r) inf_grad2 = 0.0;
    }
    for (int k = 0; k < kInner && inf_grad2 > 0.0; ++k) {
      inf_grad2 = std::min(inf_grad2, std::norm(field(x + std::polar(r, 2.0 * std::numbers::pi * k / kInner))));
    }
    // u(y) - u(x) = Re int_x^y F(z) dz along the segment
    double osc = 0.0;
    for (int k = 0; k < kBoundary; ++k) {
      const cplx d = std::polar(2.0 * r, 2.0 * std::numbers::pi * k / kBoundary);
      cplx acc(0.0, 0.0);
      for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
        acc += gl.weights[q] * field(x + 0.5 * (1.0 + gl.nodes[q]) * d);
      }
      const double du = (0.5 * d * acc).real();
      osc += du * du;
    }
    osc /= kBoundary;
    mask(idx / ny, idx % ny) = r * r * inf_grad2 < C * osc ? 1 : 0;
  });
  return mask;
}

void write_superlevel_csv_header(std::ostream& os) {
  os << "lambda,r,threshold,h,area,window_area,perimeter_error,cells,hits,degenerate\n";
}

void write_superlevel_csv_row(std::ostream& os, double lambda, const SuperlevelResult& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%zu,%zu,%zu\n", lambda, r.r,
                r.threshold, r.h, r.area, r.window_area, r.perimeter_error, r.cells, r.hits, r.degenerate);
  os << buf;
}

}  // namespace harmgrad
