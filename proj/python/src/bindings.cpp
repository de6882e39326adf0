#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "harmgrad/beltrami.hpp"
#include "harmgrad/drift_elliptic.hpp"
#include "harmgrad/experiments.hpp"
#include "harmgrad/frequency.hpp"
#include "harmgrad/geometry.hpp"
#include "harmgrad/spectral.hpp"

namespace py = pybind11;
using namespace harmgrad;

namespace {

using CArray = py::array_t<cplx, py::array::c_style | py::array::forcecast>;

ComplexGridField to_grid(const CArray& a, cplx origin, double h) {
  if (a.ndim() != 2) throw Error(ErrorKind::InvalidInput, "expected a 2-d array");
  const auto nx = static_cast<std::size_t>(a.shape(0));
  const auto ny = static_cast<std::size_t>(a.shape(1));
  return ComplexGridField(origin, h, nx, ny, std::vector<cplx>(a.data(), a.data() + nx * ny));
}

template <class T>
py::array_t<T> to_array(const GridField<T>& f) {
  py::array_t<T> out({f.nx(), f.ny()});
  std::copy(f.values().begin(), f.values().end(), out.mutable_data());
  return out;
}

py::dict superlevel_dict(const SuperlevelResult& r) {
  py::dict d;
  d["threshold"] = r.threshold;
  d["r"] = r.r;
  d["h"] = r.h;
  d["area"] = r.area;
  d["window_area"] = r.window_area;
  d["perimeter_error"] = r.perimeter_error;
  d["cells"] = r.cells;
  d["hits"] = r.hits;
  d["degenerate"] = r.degenerate;
  return d;
}

std::vector<Root> to_roots(const std::vector<std::pair<cplx, int>>& roots) {
  std::vector<Root> out;
  for (const auto& [z, m] : roots) out.push_back({z, m});
  return out;
}

}  // namespace

PYBIND11_MODULE(_harmgrad, m) {
  m.doc() = "Native kernels: frequency, superlevel sets, covers, transforms, Beltrami and drift solvers";
  py::register_exception<Error>(m, "HarmgradError", PyExc_RuntimeError);

  py::class_<HoloField>(m, "HoloField")
      .def(py::init([](const std::vector<std::pair<cplx, int>>& roots, std::vector<cplx> exp_poly, cplx scale) {
             return make_field(to_roots(roots), std::move(exp_poly), scale);
           }),
           py::arg("roots") = std::vector<std::pair<cplx, int>>{}, py::arg("exp_poly") = std::vector<cplx>{cplx(0.0)},
           py::arg("scale") = cplx(1.0))
      .def("__call__", &HoloField::operator(), py::arg("z"))
      .def("log_abs2", &HoloField::log_abs2, py::arg("z"))
      .def_property_readonly("degree", &HoloField::degree)
      .def_property_readonly("roots", [](const HoloField& f) {
        std::vector<std::pair<cplx, int>> out;
        for (const Root& r : f.roots()) out.emplace_back(r.position, r.multiplicity);
        return out;
      });

  m.def(
      "frequency_series",
      [](std::vector<double> coeffs, double r, cplx center) { return frequency_series(SeriesRep{center, std::move(coeffs)}, r); },
      py::arg("coeffs"), py::arg("r"), py::arg("center") = cplx(0.0));
  m.def(
      "series_field", [](std::vector<double> coeffs, cplx center) { return series_to_field(SeriesRep{center, std::move(coeffs)}); },
      py::arg("coeffs"), py::arg("center") = cplx(0.0));
  m.def(
      "frequency_ball", [](const HoloField& f, cplx x, double r, int qp) { return frequency_ball(f, x, r, qp); },
      py::arg("field"), py::arg("x"), py::arg("r"), py::arg("quad_points") = 1024);

  m.def(
      "superlevel_volume",
      [](const HoloField& f, double r, double threshold, cplx center, double radius, double h, int qp) {
        SuperlevelResult res;
        {
          py::gil_scoped_release release;
          res = superlevel_volume(f, r, threshold, Window{center, radius}, h, {qp, 0});
        }
        return superlevel_dict(res);
      },
      py::arg("field"), py::arg("r"), py::arg("threshold"), py::arg("center") = cplx(0.0), py::arg("radius") = 0.5,
      py::arg("h") = 0.0, py::arg("quad_points") = 256);

  m.def(
      "cartan_cover",
      [](const std::vector<std::pair<cplx, int>>& roots, double a, double delta) {
        const BallCover c = cartan_cover(to_roots(roots), a, delta);
        std::vector<std::pair<cplx, double>> balls;
        for (const Ball& b : c.balls) balls.emplace_back(b.center, b.radius);
        py::dict d;
        d["balls"] = balls;
        d["content"] = c.content_stat;
        d["delta"] = c.delta;
        return d;
      },
      py::arg("roots"), py::arg("a"), py::arg("delta"));

  m.def(
      "propagation",
      [](const HoloField& f, double a, double delta, int grid) {
        const PropagationReport r = propagation_experiment(f, a, delta, grid);
        py::dict d;
        d["gamma"] = r.gamma;
        d["beta"] = r.beta;
        d["beta_witness"] = r.beta_witness;
        d["sup_half"] = r.sup_half;
        d["witness"] = std::make_pair(r.witness.center, r.witness.radius);
        d["vacuous"] = r.vacuous;
        return d;
      },
      py::arg("field"), py::arg("a"), py::arg("delta"), py::arg("grid") = 513);

  m.def(
      "cauchy_transform",
      [](const CArray& f, cplx origin, double h, bool correction, bool padded) {
        return to_array(cauchy_transform(to_grid(f, origin, h), {correction, padded}));
      },
      py::arg("f"), py::arg("origin"), py::arg("h"), py::arg("far_field_correction") = true, py::arg("padded_output") = false);
  m.def(
      "beurling_transform",
      [](const CArray& f, cplx origin, double h, bool correction, bool padded) {
        return to_array(beurling_transform(to_grid(f, origin, h), {correction, padded}));
      },
      py::arg("f"), py::arg("origin"), py::arg("h"), py::arg("far_field_correction") = true, py::arg("padded_output") = false);

  m.def(
      "solve_beltrami",
      [](const CArray& mu, cplx origin, double h, double tol, double mu_max, double eta) {
        BeltramiOptions o;
        o.tol = tol;
        o.mu_max = mu_max;
        const BeltramiSolution s = solve_beltrami(to_grid(mu, origin, h), o);
        py::dict d;
        d["sigma"] = to_array(s.sigma);
        d["omega"] = to_array(s.omega);
        d["dz_omega"] = to_array(s.dz_omega);
        d["iterations"] = s.neumann_iters;
        d["residual"] = s.residual;
        d["sigma_sup"] = s.sigma_sup;
        if (eta > 0.0) {
          const EigenReport e = differential_check(s, eta);
          d["min_modulus"] = e.min_modulus;
          d["max_modulus"] = e.max_modulus;
          d["flagged"] = e.flagged;
        }
        return d;
      },
      py::arg("mu"), py::arg("origin"), py::arg("h"), py::arg("tol") = 1e-8, py::arg("mu_max") = 0.5, py::arg("eta") = 0.0);

  m.def(
      "solve_drift",
      [](ScalarFunction boundary, DriftFunction drift, double kappa, double h, int corrections) {
        DriftProblem p;
        p.kappa = kappa;
        p.h = h;
        p.boundary = std::move(boundary);
        p.drift = std::move(drift);
        p.corrections = corrections;
        const DriftSolution s = solve_drift(p);
        py::dict d;
        d["u"] = to_array(s.u);
        d["role"] = to_array(s.role);
        d["origin"] = s.u.origin();
        d["h"] = s.u.spacing();
        d["lambda"] = s.lambda;
        d["residual"] = s.residual;
        d["unknowns"] = s.unknowns;
        std::vector<std::pair<cplx, int>> zeros;
        for (const Root& r : gradient_zeros(s)) zeros.emplace_back(r.position, r.multiplicity);
        d["gradient_zeros"] = zeros;
        return d;
      },
      py::arg("boundary"), py::arg("drift") = DriftFunction{}, py::arg("kappa") = 1.0, py::arg("h") = 1.0 / 64,
      py::arg("corrections") = 0);

  m.def("appendix_identity_residual", &appendix_identity_residual, py::arg("ux"), py::arg("uy"), py::arg("uxx"),
        py::arg("uxy"), py::arg("uyy"));
  m.def("appendix_identity_scale", &appendix_identity_scale, py::arg("ux"), py::arg("uy"), py::arg("uxx"),
        py::arg("uxy"), py::arg("uyy"));

  m.def("catalog_json", [] { return catalog_json().dump(); });
  m.def(
      "run_experiment_json",
      [](const std::string& name, const std::string& params, std::uint64_t seed, unsigned jobs) {
        const ExperimentReport r = run_experiment(name, nlohmann::json::parse(params), RunContext{seed, jobs, {}});
        nlohmann::json j = r.to_json();
        nlohmann::json tables = nlohmann::json::object();
        for (const Table& t : r.tables) tables[t.name] = {{"columns", t.columns}, {"rows", t.rows}};
        j["tables"] = tables;
        return j.dump();
      },
      py::arg("name"), py::arg("params") = "{}", py::arg("seed") = 1, py::arg("jobs") = 0);
}
