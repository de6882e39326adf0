#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "harmgrad/geometry.hpp"
#include "harmgrad/harmonic_core.hpp"
#include "harmgrad/quadrature.hpp"

namespace harmgrad {

using DriftFunction = std::function<std::array<double, 2>(cplx)>;
using ScalarFunction = std::function<double(cplx)>;

/// Δu + b·∇u = 0 in the disk B_kappa(0), Dirichlet data on the ring of grid
/// nodes just outside it.
struct DriftProblem {
  double kappa = 1.0;
  double h = 1.0 / 64;
  DriftFunction drift;      // empty means b = 0
  ScalarFunction boundary;  // evaluated at the Dirichlet nodes
  /// Extra solves with the leading truncation error as a defect source.
  int corrections = 0;
};

enum class NodeRole : std::uint8_t { Outside = 0, Interior = 1, Dirichlet = 2 };

struct DriftSolution {
  RealGridField u;   // 0 at Outside nodes
  MaskGrid role;     // NodeRole per node
  RealGridField bx;  // drift sampled on the grid
  RealGridField by;
  double kappa = 1.0;
  double lambda = 0.0;    // max |b| over Interior nodes
  double residual = 0.0;  // relative algebraic residual of the linear system
  std::size_t unknowns = 0;
};

/// 5-point Laplacian plus centred drift, solved by sparse LU with iterative
/// refinement. Each correction pass subtracts the discrete leading truncation
/// term (h^2/12)(u_xxxx + u_yyyy) + (h^2/6)(b_1 u_xxx + b_2 u_yyy) at nodes
/// whose 5-wide stencil is defined, which lifts the order to four away from
/// the boundary. Throws ErrorKind::StencilUnstable when h·max|b| >= 2 and
/// ErrorKind::NoConvergence when the residual stays above tol.
DriftSolution solve_drift(const DriftProblem& problem, double tol = 1e-10);

/// Largest |u_h - exact| over Interior nodes.
double max_error(const DriftSolution& sol, const ScalarFunction& exact);

/// Centred differences at Interior nodes; NaN elsewhere.
struct DiscreteGradient {
  RealGridField ux;
  RealGridField uy;
};

DiscreteGradient discrete_gradient(const DriftSolution& sol);

/// Nodes with |∇_h u|^2 below this fraction of the maximum are critical.
inline constexpr double kCriticalCutoff = 1e-12;
/// Chebyshev radius, in cells, of the exclusion zone around critical nodes.
inline constexpr int kCriticalDilation = 2;

/// Zeros of ∇_h u from the winding number of u_x - i u_y around 3x3 node
/// loops tiling the grid with stride 2. Positions come from an affine fit of
/// the gradient on the loop.
std::vector<Root> gradient_zeros(const DriftSolution& sol);

struct GradientLogField {
  RealGridField phi;  // log |∇_h u|^2 on valid nodes, NaN elsewhere
  RealGridField psi;  // phi - sum m_j log|z - z_j|^2 on valid nodes, NaN elsewhere
  MaskGrid critical;  // below the cutoff, or nearest node to a zero
  MaskGrid valid;  // Interior, every neighbour Interior, off the dilated critical set
  std::vector<Root> zeros;
  double reassembly = 0.0;  // max |phi - log P - psi| over valid nodes
};

/// zeros empty selects gradient_zeros(sol). Throws ErrorKind::ZeroMismatch if
/// a zero sits on a valid node or the reassembly misses 1e-8.
GradientLogField gradient_log_field(const DriftSolution& sol, std::vector<Root> zeros = {});

/// C^infinity bump exp(1 - 1/(1 - |z-c|^2/rho^2)) supported in B_rho(c).
struct TestBump {
  cplx center{0.0, 0.0};
  double radius = 0.1;

  double value(cplx z) const;
  std::array<double, 2> gradient(cplx z) const;
};

/// Max over the bank of |∫∇φ·∇η + 2∫(b·∇u/|∇u|^2)∇u·∇η| by grid quadrature.
/// Throws ErrorKind::MaskOverlap if a bump reaches a node that is not valid.
double phi_weak_residual(const DriftSolution& sol, const GradientLogField& field,
                         std::span<const TestBump> bank);

/// Bumps of radius `radius` centred on a lattice of spacing `radius` inside
/// B_reach, keeping those clear of invalid nodes whose support stays
/// `clearance` away from every zero.
std::vector<TestBump> default_test_bank(const GradientLogField& field, double radius, double reach,
                                        double clearance = 0.0);

/// Max over dyadic subsquares Q of [-half_side, half_side]^2 of the mean of
/// |g - g_Q| over valid nodes of Q; squares with fewer than min_nodes valid
/// nodes are skipped.
double dyadic_bmo(const RealGridField& gx, const RealGridField& gy, const MaskGrid& valid,
                  double half_side, std::size_t min_nodes = 4);

struct PsiOptions {
  double epsilon = 0.5;
  double c_epsilon = 1.0;
  double threshold = 0.75;
  int samples = 64;  // sample centres per axis of the lattice over B_{kappa/2}
  int quad_points = 256;
};

struct PsiReport {
  double budget = 0.0;
  double max_abs_psi = 0.0;
  double ratio = 0.0;  // max_abs_psi / budget
  double bmo = 0.0;
  double scale = 0.0;  // c_epsilon / budget^{1 + epsilon}
  double max_small_scale_n = 0.0;
  std::size_t sampled = 0;
  bool small_scale_ok = true;
  std::size_t zero_count = 0;  // with multiplicity
};

/// ψ bounds, dyadic BMO of ∇_h ψ over B_{kappa/2}, and the frequency of e^ψ
/// at scale c_epsilon / budget^{1 + epsilon} on sampled centres whose
/// 2r-disk stays on valid nodes.
PsiReport psi_report(const DriftSolution& sol, const GradientLogField& field, double budget,
                     PsiOptions opts = {});

/// log of the bilinear interpolant of |∇_h u|^2.
LogDensity gradient_density(const DriftSolution& sol);

/// Frequency of |∇_h u|^2 at (0, kappa / 4).
double measured_budget(const DriftSolution& sol, int quad_points = 1024);

/// 2v|D²u|² - 4|D²u ∇u|² - (-4Δu (D²u ∇u)·∇u + 2v(Δu)²) with v = |∇u|².
double appendix_identity_residual(double ux, double uy, double uxx, double uxy, double uyy);

/// Sum of the magnitudes of the four terms, for relative residuals.
double appendix_identity_scale(double ux, double uy, double uxx, double uxy, double uyy);

/// Boundary data Re(z^{Λ+1})/(Λ+1), so b = 0 gives F = z^Λ, plus the drift
/// b = strength * (cos(πy), sin(πx)).
DriftProblem power_drift_problem(int lambda, double strength, double h, double kappa = 1.0);

struct DriftSuperlevelRow {
  int lambda = 0;
  double strength = 0.0;
  double r = 0.0;
  double area = 0.0;
  double normalized = 0.0;  // area / (Λ^{2+ε} r^2)
  double harmonic_normalized = 0.0;  // area / (Λ^2 r^2)
  SuperlevelResult scan;
  bool failed = false;
  std::string error;
};

struct DriftSuperlevelOptions {
  double threshold = 1.0;
  double epsilon = 0.5;
  double h = 1.0 / 256;
  int corrections = 1;
  Window window{};
  int quad_points = 256;
  unsigned jobs = 0;
};

/// One solve per (Λ, strength); every r reuses it. Rows are ordered by
/// (Λ, strength, r). Solver errors mark the row failed and the sweep goes on.
std::vector<DriftSuperlevelRow> drift_superlevel_experiment(std::span<const int> lambdas,
                                                            std::span<const double> strengths,
                                                            std::span<const double> rs,
                                                            DriftSuperlevelOptions opts = {});

void write_drift_superlevel_csv_header(std::ostream& os);
void write_drift_superlevel_csv_row(std::ostream& os, const DriftSuperlevelRow& row);

}  // namespace harmgrad
