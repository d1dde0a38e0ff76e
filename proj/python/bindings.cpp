#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cofreq/flattening.hpp"
#include "cofreq/frequency.hpp"
#include "cofreq/homogeneous.hpp"
#include "cofreq/io.hpp"
#include "cofreq/singular.hpp"
#include "suite.hpp"

namespace py = pybind11;
using namespace cofreq;

namespace {

// Structured results cross the boundary as JSON text; the Python package decodes them.
template <class T>
std::string dumps(const T &x) {
  return to_json(x).dump();
}

Mat stack(const std::vector<Vec> &pts, int n) {
  Mat M(pts.size(), n);
  for (size_t i = 0; i < pts.size(); ++i) M.row(i) = pts[i].transpose();
  return M;
}

EnergyRoute route_from(const std::string &r) {
  if (r == "auto") return EnergyRoute::Auto;
  if (r == "bulk") return EnergyRoute::Bulk;
  if (r == "flux") return EnergyRoute::Flux;
  throw std::invalid_argument("route must be auto, bulk or flux");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "cofreq native core";

  py::class_<AmbientConfig>(m, "AmbientConfig")
      .def(py::init<int, int>(), py::arg("n"), py::arg("d"))
      .def_readonly("n", &AmbientConfig::n)
      .def_readonly("d", &AmbientConfig::d)
      .def_property_readonly("m", &AmbientConfig::m)
      .def("__repr__", [](const AmbientConfig &c) {
        return "AmbientConfig(n=" + std::to_string(c.n) + ", d=" + std::to_string(c.d) + ")";
      });

  py::class_<Field, std::shared_ptr<Field>>(m, "Field")
      .def_property_readonly("dim", &Field::dim)
      .def("value", &Field::value, py::arg("X"))
      .def("gradient", &Field::gradient, py::arg("X"))
      .def("hessian", &Field::hessian, py::arg("X"));

  py::class_<HomogeneousSolution, Field, std::shared_ptr<HomogeneousSolution>>(m, "HomogeneousSolution")
      .def_property_readonly("Lambda", &HomogeneousSolution::Lambda)
      .def_property_readonly("config", &HomogeneousSolution::config)
      .def("to_json", [](const HomogeneousSolution &u) { return to_json(u).dump(); });

  py::class_<SolutionMix, Field, std::shared_ptr<SolutionMix>>(m, "SolutionMix")
      .def(py::init<const AmbientConfig &>(), py::arg("cfg"))
      .def("add", &SolutionMix::add, py::arg("u"), py::arg("c"))
      .def_property_readonly("config", &SolutionMix::config);

  m.def("gallery", &gallery, py::arg("name"), py::arg("cfg"));
  m.def("gallery_names", &gallery_names);
  m.def("distance_solution", &distance_solution, py::arg("cfg"));
  m.def("pure_mode", &pure_mode, py::arg("cfg"), py::arg("j"), py::arg("harmonic_index") = 0);
  m.def("random_solution", py::overload_cast<const AmbientConfig &, double, unsigned long>(&random_solution),
        py::arg("cfg"), py::arg("Lambda_max"), py::arg("seed"));
  m.def("random_mix", &random_mix, py::arg("cfg"), py::arg("Lambda_max"), py::arg("terms"), py::arg("seed"));
  m.def("pde_residual", &pde_residual, py::arg("u"), py::arg("X"), py::arg("cfg"));

  m.def("geometric_radii", &geometric_radii, py::arg("r_min"), py::arg("r_max"), py::arg("ratio") = std::pow(2.0, 0.25));
  m.def(
      "_frequency_profile",
      [](const Field &u, const Vec &center, const std::vector<double> &radii, const AmbientConfig &cfg,
         const std::string &route) {
        FrequencyOptions o;
        o.route = route_from(route);
        py::gil_scoped_release release;
        return dumps(frequency_profile(u, center, radii, cfg, o));
      },
      py::arg("u"), py::arg("center"), py::arg("radii"), py::arg("cfg"), py::arg("route") = "auto");
  m.def("closed_form_frequency", &closed_form_frequency, py::arg("weights"), py::arg("r"));
  m.def("annulus_coefficients", &annulus_coefficients, py::arg("Lambda"), py::arg("d"), py::arg("rho"), py::arg("R"),
        py::arg("c_rho"), py::arg("c_R"));

  m.def(
      "_sample_singular_set",
      [](const Field &u, const Vec &center, double r0, double pitch, const AmbientConfig &cfg) {
        SingularSample S;
        {
          py::gil_scoped_release release;
          S = sample_singular_set(u, center, r0, pitch, cfg);
        }
        return py::make_tuple(stack(S.points, cfg.n), stack(S.boundary_points, cfg.n), dumps(S));
      },
      py::arg("u"), py::arg("center"), py::arg("r0"), py::arg("pitch"), py::arg("cfg"));
  m.def(
      "_minkowski_content",
      [](const Mat &points, double pitch, const std::vector<double> &s, const Vec &center, double r0,
         const AmbientConfig &cfg, unsigned long seed) {
        std::vector<Vec> pts;
        for (int i = 0; i < points.rows(); ++i) pts.push_back(points.row(i).transpose());
        MinkowskiOptions o;
        o.seed = seed;
        return dumps(minkowski_content(pts, pitch, s, center, r0, cfg, o));
      },
      py::arg("points"), py::arg("pitch"), py::arg("s"), py::arg("center"), py::arg("r0"), py::arg("cfg"),
      py::arg("seed") = 7);

  m.def("c_beta", &c_beta, py::arg("d"), py::arg("beta"));
  m.def("c_beta_quadrature", &c_beta_quadrature, py::arg("d"), py::arg("beta"));

  py::class_<GraphDomain>(m, "GraphDomain")
      .def_static("flat", &GraphDomain::flat, py::arg("cfg"), py::arg("r0") = 0.1)
      .def_static("linear", &GraphDomain::linear, py::arg("cfg"), py::arg("L"), py::arg("r0") = 0.1)
      .def_static("paraboloid", &GraphDomain::paraboloid, py::arg("cfg"), py::arg("kappa"), py::arg("r0") = 0.1,
                  py::arg("e") = Vec())
      .def_static("trig_bump", &GraphDomain::trig_bump, py::arg("cfg"), py::arg("a"), py::arg("k"), py::arg("r0") = 0.1,
                  py::arg("e") = Vec())
      .def("distance", &GraphDomain::distance, py::arg("X"));

  m.def(
      "D_beta", [](const Vec &X, const GraphDomain &G, double beta) { return D_beta(X, G, beta); }, py::arg("X"),
      py::arg("G"), py::arg("beta"));

  py::class_<FlatteningMap>(m, "FlatteningMap")
      .def(py::init([](const GraphDomain &G, double beta, double epsilon) {
             FlatteningOptions o;
             o.beta = beta;
             o.epsilon = epsilon;
             return build_flattening(G, o);
           }),
           py::arg("G"), py::arg("beta") = 2.0, py::arg("epsilon") = 0.05)
      .def_property_readonly("cbeta", &FlatteningMap::cbeta)
      .def_property_readonly("achieved_epsilon", &FlatteningMap::achieved_epsilon)
      .def("rho", &FlatteningMap::rho, py::arg("X"))
      .def("jacobian", &FlatteningMap::jacobian, py::arg("X"))
      .def(
          "conjugated_matrix", [](const FlatteningMap &f, const Vec &X) { return conjugated_matrix(f, X); },
          py::arg("X"));

  m.def(
      "_run_criterion",
      [](int id, unsigned long seed) {
        suite::SuiteOptions o;
        o.seed = seed;
        suite::CheckResult r;
        {
          py::gil_scoped_release release;
          r = suite::run_criterion(id, o);
        }
        nlohmann::json j = suite::to_json(r);
        j["seconds"] = r.seconds;
        return j.dump();
      },
      py::arg("id"), py::arg("seed") = 1);
}
