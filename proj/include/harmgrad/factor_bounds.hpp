#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "harmgrad/harmonic_core.hpp"

namespace harmgrad {

/// F = P * g with P = prod (z - a_j) over the roots of F in the open unit
/// disk and g nonvanishing on the closed unit disk.
struct Factorization {
  std::vector<Root> poly_roots;
  HoloField cofactor;
  bool monic_flag = true;

  /// P(z), monic.
  cplx poly(cplx z) const;
  int poly_degree() const noexcept;
};

/// Roots within this distance of |z| = 1 make the split ambiguous.
inline constexpr double kBoundaryRootTol = 1e-12;

Factorization factor_in_disk(const HoloField& field);

struct ZeroCountOptions {
  int quad_points = 256;
  int max_quad_points = 1 << 20;
  double near_tol = 1e-9;
};

/// Argument-principle count (1/2 pi i) \oint F'/F dz over |z - center| = radius
/// by the periodic trapezoid rule, refined until two passes agree.
int count_zeros_circle(const HoloField& field, cplx center, double radius,
                       ZeroCountOptions opts = {});

/// Number of listed roots strictly inside the circle, with multiplicity.
int listed_zeros_inside(const HoloField& field, cplx center, double radius);

struct NonvanishingOptions {
  double c = 0.05;
  int center_grid = 32;
  int quad_points = 256;
  int boundary_samples = 2048;
};

struct NonvanishingReport {
  double budget = 0.0;
  double n_unit = 0.0;             // N(0, 1)
  double log_max_unit = 0.0;       // max log|F| on |z| = 1 before renormalizing
  double max_log_half_raw = 0.0;   // max |log|F|| on B_1/2 for F as given
  double max_log_half = 0.0;       // same after renormalizing max_{B_1}|F| = 1
  double sup_small_scale_n = 0.0;  // sup over sampled x in B_1 of N(x, c / budget)
  double ratio = 0.0;              // max_log_half / budget
  double scale = 0.0;              // c / budget
  int centers = 0;
  bool violation = false;          // sup_small_scale_n > 1/2
};

/// Bounds for gradients without zeros in B_1: the logarithmic size of F on
/// B_1/2 and the frequency at scale c/budget. Throws BudgetViolated when
/// N(0, 1) exceeds the budget.
NonvanishingReport nonvanishing_report(const HoloField& field, double budget,
                                       NonvanishingOptions opts = {});

struct SubadditivityOptions {
  double t = 5.0;
  double C = 10.0;
  int quad_points = 4096;
};

struct SubadditivityReport {
  double budget = 0.0;
  double t = 0.0;
  double C = 0.0;
  double n_field = 0.0;     // N_F(0, 2t)
  double n_cofactor = 0.0;  // N_g(0, t)
  double ratio = 0.0;       // n_cofactor / n_field, 0 when n_field == 0
  bool violation = false;   // n_cofactor > C * budget
};

SubadditivityReport quasi_subadditivity_check(const HoloField& field, double budget,
                                              SubadditivityOptions opts = {});

/// {lemma, inputs, measured, threshold, pass}.
struct LemmaRecord {
  std::string lemma;
  nlohmann::json inputs;
  nlohmann::json measured;
  double threshold = 0.0;
  bool pass = false;
};

nlohmann::json to_json(const LemmaRecord& r);
LemmaRecord to_record(const NonvanishingReport& r, const HoloField& field);
LemmaRecord to_record(const SubadditivityReport& r, const HoloField& field);

}  // namespace harmgrad
