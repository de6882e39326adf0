#pragma once

#include <complex>
#include <vector>

#include <json.hpp>

#include "harmgrad/grid.hpp"

namespace harmgrad {

struct Root {
  cplx position{0.0, 0.0};
  int multiplicity = 1;
};

/// Holomorphic gradient F = u_x - i u_y of a planar harmonic function u,
/// held in product form F(z) = scale * exp(Q(z)) * prod_j (z - z_j)^{m_j}.
/// Q has complex coefficients exp_poly[0..m] in increasing degree.
class HoloField {
 public:
  /// F == 1.
  HoloField();
  HoloField(std::vector<Root> roots, std::vector<cplx> exp_poly, cplx scale);

  const std::vector<Root>& roots() const noexcept { return roots_; }
  const std::vector<cplx>& exp_poly() const noexcept { return exp_poly_; }
  cplx scale() const noexcept { return scale_; }

  /// Total number of zeros counted with multiplicity.
  int degree() const noexcept;

  cplx operator()(cplx z) const;
  cplx derivative(cplx z) const;

  /// log |F(z)|^2, -inf at a listed root. Never overflows for large Re Q.
  double log_abs2(cplx z) const;

  HoloField with_scale(cplx scale) const;

 private:
  std::vector<Root> roots_;
  std::vector<cplx> exp_poly_;
  cplx scale_{1.0, 0.0};
};

/// Expansion u - u(center) = sum_{d>=1} a_d Re((z - center)^d); coeffs[d-1] = a_d.
struct SeriesRep {
  cplx center{0.0, 0.0};
  std::vector<double> coeffs;
};

struct GradientHessian {
  double ux = 0.0;
  double uy = 0.0;
  double uxx = 0.0;
  double uxy = 0.0;
  double uyy = 0.0;
};

HoloField make_field(std::vector<Root> roots, std::vector<cplx> exp_poly, cplx scale);

cplx eval_F(const HoloField& field, cplx z);

/// Gradient from F and Hessian from F' through the Cauchy-Riemann equations.
GradientHessian eval_derivatives(const HoloField& field, cplx z);

/// values(i, j) = F(origin + i*h + 1i*j*h).
ComplexGridField sample_grid(const HoloField& field, cplx origin, double h, std::size_t nx,
                             std::size_t ny, std::size_t max_nodes = kDefaultMaxNodes);

/// Coefficients (increasing degree) of scale * prod_j (z - z_j)^{m_j}.
/// The exponential factor is not included.
std::vector<cplx> expand_roots(const HoloField& field);

/// Horner evaluation of a coefficient vector in increasing degree.
cplx horner(const std::vector<cplx>& coeffs, cplx z);

/// JSON form {"roots":[[re,im,mult],...], "exp_poly":[[re,im],...], "scale":[re,im]}.
nlohmann::json to_json(const HoloField& field);
HoloField field_from_json(const nlohmann::json& j);

}  // namespace harmgrad
