#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include <json.hpp>

#include "harmgrad/harmonic_core.hpp"
#include "harmgrad/quadrature.hpp"

namespace harmgrad {

struct Ball {
  cplx center{0.0, 0.0};
  double radius = 0.0;
};

struct BallCover {
  std::vector<Ball> balls;
  double delta = 1.0;
  double content_stat = 0.0;  // sum of radius^delta

  double recompute() const;
  bool covers(cplx z) const;
};

nlohmann::json to_json(const BallCover& cover);

/// Disk-shaped scan region.
struct Window {
  cplx center{0.0, 0.0};
  double radius = 0.5;

  double area() const;
};

struct SuperlevelOptions {
  int quad_points = 256;
  unsigned jobs = 0;
};

struct SuperlevelResult {
  double threshold = 0.0;
  double r = 0.0;
  double h = 0.0;
  double area = 0.0;             // h^2 * hits
  double window_area = 0.0;      // h^2 * cells
  double perimeter_error = 0.0;  // h^2 * cells whose 4-neighbours disagree
  std::size_t cells = 0;
  std::size_t hits = 0;
  std::size_t degenerate = 0;
};

/// Cell-centre count of {x in window : N(x, r) > threshold}. h = 0 selects r / 4.
/// Throws ErrorKind::Resolution when h > r / 4.
SuperlevelResult superlevel_volume(const HoloField& field, double r, double threshold,
                                   Window window = {}, double h = 0.0, SuperlevelOptions opts = {});
SuperlevelResult superlevel_volume(const LogDensity& log_density, double r, double threshold,
                                   Window window = {}, double h = 0.0, SuperlevelOptions opts = {});

/// sup over sampled levels g of g * |{f >= g}|^{1/2}, the measure taken as
/// (fraction of samples) * region_area. Samples must be equally weighted.
/// Levels supported by fewer than min_count samples are skipped.
double weak_l2_quasinorm(std::span<const double> values, double region_area, std::size_t min_count = 1);

/// Constant of the covering bound sum r^delta <= C e^{-a delta / n}.
inline constexpr double kCartanConstant = 16.0;

/// Classical Cartan construction for {|P| < e^{-a}} with P monic with the given roots.
BallCover cartan_cover(std::span<const Root> roots, double a, double delta);

struct CoverCheck {
  std::size_t samples = 0;
  std::size_t in_set = 0;
  std::size_t uncovered = 0;
};

/// Rejection sampling of {|P| < e^{-a}} in B_1: half the points uniform in
/// B_1, half uniform in the 1.25x enlargement of a random ball.
CoverCheck verify_cover(std::span<const Root> roots, double a, const BallCover& cover,
                        std::size_t samples = 10000, std::uint64_t seed = 1);

struct ContentEstimate {
  double content = 0.0;
  double circumscription = 1.4142135623730951;  // ball radius / half side
  std::size_t squares = 0;
};

/// Optimal cover of the occupied cells by dyadic squares, each replaced by
/// its circumscribed ball. Upper bound for the delta-dimensional content.
ContentEstimate hausdorff_content_upper(const MaskGrid& mask, double delta);
BallCover hausdorff_cover(const MaskGrid& mask, double delta);

struct PropagationReport {
  double a = 0.0;
  double delta = 0.0;
  int grid = 0;
  double log_max = 0.0;        // log max |F| over grid nodes in B_1
  double sup_half = 0.0;       // after normalization
  double gamma = 0.0;          // -log(sup_half) / a, 0 when sup_half >= 1
  double beta = 0.0;           // dyadic upper bound for the content of E_a
  double beta_witness = 0.0;   // witness_radius^delta
  Ball witness;
  std::size_t set_cells = 0;
  bool vacuous = false;        // E_a has no grid node
};

/// E_a = {|F| / max_{B_1}|F| < e^{-a}} on a grid x grid node lattice over [-1, 1]^2.
PropagationReport propagation_experiment(const HoloField& field, double a, double delta, int grid = 513);

/// Effective critical set at scale r with constant C on a grid of node
/// positions: r^2 inf_{B_r(x)} |grad u|^2 < C mean_{|y-x|=2r} |u(y) - u(x)|^2.
MaskGrid effective_critical_mask(const HoloField& field, double r, double C, cplx origin, double h,
                                 std::size_t nx, std::size_t ny);

void write_superlevel_csv_header(std::ostream& os);
void write_superlevel_csv_row(std::ostream& os, double lambda, const SuperlevelResult& r);

}  // namespace harmgrad
