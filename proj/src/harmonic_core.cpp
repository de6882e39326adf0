#include "harmgrad/harmonic_core.hpp"

#include <cmath>
#include <limits>

namespace harmgrad {

namespace {

bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

cplx int_pow(cplx w, int m) {
  cplx result(1.0, 0.0);
  cplx base = w;
  while (m > 0) {
    if (m & 1) result *= base;
    base *= base;
    m >>= 1;
  }
  return result;
}

// Q(z) and Q'(z) together.
std::pair<cplx, cplx> eval_q(const std::vector<cplx>& c, cplx z) {
  cplx q(0.0, 0.0);
  cplx dq(0.0, 0.0);
  for (std::size_t k = c.size(); k-- > 0;) {
    dq = dq * z + q;
    q = q * z + c[k];
  }
  return {q, dq};
}

cplx parse_pair(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2) {
    throw Error(ErrorKind::InvalidInput, "expected [re, im] pair");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

HoloField::HoloField() : exp_poly_{cplx(0.0, 0.0)} {}

HoloField::HoloField(std::vector<Root> roots, std::vector<cplx> exp_poly, cplx scale)
    : roots_(std::move(roots)), exp_poly_(std::move(exp_poly)), scale_(scale) {
  if (exp_poly_.empty()) exp_poly_.emplace_back(0.0, 0.0);
  if (!finite(scale_)) throw Error(ErrorKind::NonFinite, "scale must be finite");
  for (const cplx& c : exp_poly_) {
    if (!finite(c)) throw Error(ErrorKind::NonFinite, "exp_poly coefficients must be finite");
  }
  for (const Root& r : roots_) {
    if (!finite(r.position)) throw Error(ErrorKind::NonFinite, "root positions must be finite");
    if (r.multiplicity < 1) throw Error(ErrorKind::InvalidInput, "root multiplicity must be >= 1");
  }
}

int HoloField::degree() const noexcept {
  int n = 0;
  for (const Root& r : roots_) n += r.multiplicity;
  return n;
}

cplx HoloField::operator()(cplx z) const {
  cplx prod(1.0, 0.0);
  for (const Root& r : roots_) {
    if (z == r.position) return {0.0, 0.0};
    prod *= int_pow(z - r.position, r.multiplicity);
  }
  return scale_ * std::exp(eval_q(exp_poly_, z).first) * prod;
}

cplx HoloField::derivative(cplx z) const {
  const auto [q, dq] = eval_q(exp_poly_, z);
  cplx val = scale_ * std::exp(q);
  cplx der = val * dq;
  for (const Root& r : roots_) {
    const cplx w = z - r.position;
    const cplx f = int_pow(w, r.multiplicity);
    const cplx df = static_cast<double>(r.multiplicity) * int_pow(w, r.multiplicity - 1);
    der = der * f + val * df;
    val = val * f;
  }
  return der;
}

double HoloField::log_abs2(cplx z) const {
  if (scale_ == cplx(0.0, 0.0)) return -std::numeric_limits<double>::infinity();
  double s = std::log(std::abs(scale_)) + eval_q(exp_poly_, z).first.real();
  for (const Root& r : roots_) {
    const double d = std::abs(z - r.position);
    if (d == 0.0) return -std::numeric_limits<double>::infinity();
    s += r.multiplicity * std::log(d);
  }
  return 2.0 * s;
}

HoloField HoloField::with_scale(cplx scale) const { return HoloField(roots_, exp_poly_, scale); }

HoloField make_field(std::vector<Root> roots, std::vector<cplx> exp_poly, cplx scale) {
  return HoloField(std::move(roots), std::move(exp_poly), scale);
}

cplx eval_F(const HoloField& field, cplx z) { return field(z); }

GradientHessian eval_derivatives(const HoloField& field, cplx z) {
  const cplx f = field(z);
  const cplx df = field.derivative(z);
  return {f.real(), -f.imag(), df.real(), -df.imag(), -df.real()};
}

ComplexGridField sample_grid(const HoloField& field, cplx origin, double h, std::size_t nx,
                             std::size_t ny, std::size_t max_nodes) {
  if (nx != 0 && ny > max_nodes / nx) {
    throw Error(ErrorKind::GridTooLarge, "requested grid exceeds the node cap");
  }
  ComplexGridField out(origin, h, nx, ny);
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t j = 0; j < ny; ++j) out(i, j) = field(out.node(i, j));
  }
  return out;
}

std::vector<cplx> expand_roots(const HoloField& field) {
  std::vector<cplx> c{field.scale()};
  for (const Root& r : field.roots()) {
    for (int k = 0; k < r.multiplicity; ++k) {
      // multiply by (z - a)
      c.emplace_back(0.0, 0.0);
      for (std::size_t i = c.size() - 1; i > 0; --i) c[i] = c[i - 1] - r.position * c[i];
      c[0] = -r.position * c[0];
    }
  }
  return c;
}

cplx horner(const std::vector<cplx>& coeffs, cplx z) {
  cplx s(0.0, 0.0);
  for (std::size_t k = coeffs.size(); k-- > 0;) s = s * z + coeffs[k];
  return s;
}

nlohmann::json to_json(const HoloField& field) {
  nlohmann::json roots = nlohmann::json::array();
  for (const Root& r : field.roots()) {
    roots.push_back({r.position.real(), r.position.imag(), r.multiplicity});
  }
  nlohmann::json poly = nlohmann::json::array();
  for (const cplx& c : field.exp_poly()) poly.push_back({c.real(), c.imag()});
  return {{"roots", roots},
          {"exp_poly", poly},
          {"scale", {field.scale().real(), field.scale().imag()}}};
}

HoloField field_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorKind::InvalidInput, "field spec must be an object");
  for (const auto& [key, _] : j.items()) {
    if (key != "roots" && key != "exp_poly" && key != "scale") {
      throw Error(ErrorKind::InvalidInput, "unknown field key '" + key + "'");
    }
  }
  std::vector<Root> roots;
  if (j.contains("roots")) {
    for (const auto& r : j.at("roots")) {
      if (!r.is_array() || r.size() < 2 || r.size() > 3) {
        throw Error(ErrorKind::InvalidInput, "root entries are [re, im] or [re, im, mult]");
      }
      Root root;
      root.position = {r[0].get<double>(), r[1].get<double>()};
      root.multiplicity = r.size() == 3 ? r[2].get<int>() : 1;
      roots.push_back(root);
    }
  }
  std::vector<cplx> poly;
  if (j.contains("exp_poly")) {
    for (const auto& c : j.at("exp_poly")) poly.push_back(parse_pair(c));
  }
  const cplx scale = j.contains("scale") ? parse_pair(j.at("scale")) : cplx(1.0, 0.0);
  return HoloField(std::move(roots), std::move(poly), scale);
}

}  // namespace harmgrad
