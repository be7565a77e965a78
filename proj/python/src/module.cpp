#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pilotscat/errors.hpp"
#include "pilotscat/flowgeom.hpp"
#include "pilotscat/observables.hpp"
#include "pilotscat/runner.hpp"
#include "pilotscat/rutherford.hpp"
#include "pilotscat/scenario.hpp"
#include "pilotscat/wavefield.hpp"

namespace py = pybind11;
using namespace pilotscat;

PYBIND11_MODULE(_pilotscat, m) {
  m.doc() = "Pilot-wave trajectories for charged-particle scattering";
  m.attr("__version__") = tool_version;

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<NodalSingularity>(m, "NodalSingularity", base.ptr());
  py::register_exception<NoRoot>(m, "NoRoot", base.ptr());
  py::register_exception<RegimeViolation>(m, "RegimeViolation", base.ptr());
  py::register_exception<InsufficientStatistics>(m, "InsufficientStatistics", base.ptr());

  py::enum_<WaveMode>(m, "WaveMode")
      .value("free", WaveMode::free)
      .value("diffuse", WaveMode::diffuse)
      .value("bragg", WaveMode::bragg)
      .value("semiclassical", WaveMode::semiclassical);

  py::class_<BeamSpec>(m, "BeamSpec")
      .def(py::init<>())
      .def_readwrite("k0", &BeamSpec::k0)
      .def_readwrite("l", &BeamSpec::l)
      .def_readwrite("D", &BeamSpec::D)
      .def_readwrite("l0", &BeamSpec::l0)
      .def_readwrite("Z1", &BeamSpec::Z1)
      .def_readwrite("mass", &BeamSpec::mass)
      .def_property_readonly("v0", &BeamSpec::v0)
      .def("validate", &BeamSpec::validate);

  py::class_<TargetSpec>(m, "TargetSpec")
      .def(py::init<>())
      .def_readwrite("Z", &TargetSpec::Z)
      .def_readwrite("a", &TargetSpec::a)
      .def_readwrite("d", &TargetSpec::d)
      .def_readwrite("deltaA", &TargetSpec::deltaA)
      .def_readwrite("Nperp", &TargetSpec::Nperp)
      .def_readwrite("r0", &TargetSpec::r0)
      .def("validate", &TargetSpec::validate);

  py::class_<WaveModel>(m, "WaveModel")
      .def_readonly("beam", &WaveModel::beam)
      .def_readonly("mode", &WaveModel::mode)
      .def_readonly("coupling", &WaveModel::coupling)
      .def_property_readonly("v0", &WaveModel::v0);

  m.def(
      "make_model",
      [](const BeamSpec& beam, std::optional<TargetSpec> target, WaveMode mode, bool exact_spreading) {
        ModelOptions o;
        o.exact_spreading = exact_spreading;
        return make_model(beam, target, mode, o);
      },
      py::arg("beam"), py::arg("target") = py::none(), py::arg("mode") = WaveMode::diffuse,
      py::arg("exact_spreading") = false);

  m.def(
      "psi",
      [](double z, double R, double t, const WaveModel& model) {
        const auto f = eval_psi({z, R}, t, model);
        return py::make_tuple(f.value, f.grad_z, f.grad_R);
      },
      py::arg("z"), py::arg("R"), py::arg("t"), py::arg("model"), "psi and its (z, R) gradient");

  m.def(
      "velocity",
      [](double z, double R, double t, const WaveModel& model) {
        const auto v = velocity({z, R}, t, model);
        return py::make_tuple(v.vz, v.vR);
      },
      py::arg("z"), py::arg("R"), py::arg("t"), py::arg("model"));

  m.def(
      "bragg_angles",
      [](double k0, double a) {
        std::vector<double> out;
        for (const auto& e : bragg_angles(k0, a).entries) out.push_back(e.theta);
        return out;
      },
      py::arg("k0"), py::arg("a"));

  m.def(
      "separator_topology",
      [](double t, const WaveModel& model, int n_theta) {
        return to_string(separator_curve(t, model, default_theta_grid(n_theta)).topology);
      },
      py::arg("t"), py::arg("model"), py::arg("n_theta") = 512);

  m.def("tof_difference_bohm", &tof_difference_bohm, py::arg("theta1"), py::arg("theta2"), py::arg("model"));
  m.def("tof_difference_histories", &tof_difference_histories, py::arg("theta1"), py::arg("theta2"),
        py::arg("beam"), py::arg("Z"), py::arg("Z1"), py::arg("signed_charge") = false);
  m.def("tof_difference_kijowski", &tof_difference_kijowski, py::arg("theta1"), py::arg("theta2"));

  m.def(
      "rutherford_deflections",
      [](std::vector<double> b_list) {
        SemiclassicalSpec spec;
        spec.b_list = std::move(b_list);
        const auto rep = deflection_vs_b(run_rutherford(spec));
        return py::make_tuple(rep.centre, rep.classical, rep.spearman);
      },
      py::arg("b_list"), "centre-path deflections, classical angles and Spearman rho for the default alpha setup");

  m.def("preset_names", &preset_names);
  m.def("preset_text", &preset_text, py::arg("name"));
  m.def(
      "canonical", [](const std::string& text) { return dump_scenario(parse_scenario(text)); }, py::arg("text"),
      "parse, validate and re-emit scenario text in canonical form");
  m.def(
      "run_scenario",
      [](const std::string& text, const std::string& out_dir) {
        const auto man = run_scenario(parse_scenario(text), out_dir);
        return man.to_json();
      },
      py::arg("text"), py::arg("out_dir"), "runs scenario text and returns the manifest JSON");
}
