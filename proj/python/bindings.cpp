#include <pybind11/complex.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "sfgsta/cli.hpp"
#include "sfgsta/errors.hpp"
#include "sfgsta/profiles.hpp"
#include "sfgsta/sweeps.hpp"
#include "sfgsta/version.hpp"

namespace py = pybind11;
using namespace sfg;

namespace {

py::dict trajectory_dict(const Trajectory& t) {
  std::vector<double> p1, p3;
  for (const auto& s : t.states) {
    p1.push_back(s.signal_population());
    p3.push_back(s.idler_population());
  }
  py::dict d;
  d["z"] = t.z;
  d["signal_population"] = p1;
  d["idler_population"] = p3;
  d["efficiency"] = efficiency(t);
  d["norm_drift"] = t.norm_drift;
  d["final_a1"] = t.final_state().a1;
  d["final_a3"] = t.final_state().a3;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "C++ core of sfgsta";
  m.attr("__version__") = kVersion;

  auto base = py::register_exception<Error>(m, "Error");
  py::register_exception<ValidationError>(m, "ValidationError", base);
  py::register_exception<DomainError>(m, "DomainError", base);
  py::register_exception<ModelError>(m, "ModelError", base);
  py::register_exception<ContractError>(m, "ContractError", base);
  py::register_exception<DesignError>(m, "DesignError", base);
  py::register_exception<SingularityError>(m, "SingularityError", base);
  py::register_exception<IntegrationError>(m, "IntegrationError", base);

  py::class_<MaterialModel, std::shared_ptr<MaterialModel>>(m, "MaterialModel")
      .def_readonly("name", &MaterialModel::name)
      .def_readonly("band_min_um", &MaterialModel::band_min_um)
      .def_readonly("band_max_um", &MaterialModel::band_max_um);
  m.def("load_material", [](const std::string& path) { return std::make_shared<MaterialModel>(load_material(path)); },
        py::arg("path"));
  m.def("refractive_index", &refractive_index, py::arg("material"), py::arg("lambda_um"),
        py::arg("temperature_c") = kReferenceTemperatureC);

  py::class_<OpticalSetup>(m, "OpticalSetup")
      .def(py::init([](std::shared_ptr<MaterialModel> mat, double l1, double l2, double t, double pump, double chi2) {
             OpticalSetup s;
             s.material = std::move(mat);
             s.lambda1_um = l1;
             s.lambda2_um = l2;
             s.temperature_c = t;
             s.pump_intensity_mw_cm2 = pump;
             s.chi2_pm_v = chi2;
             s.validate();
             return s;
           }),
           py::arg("material"), py::arg("lambda1_um") = 1.535, py::arg("lambda2_um") = 1.064,
           py::arg("temperature_c") = 25.0, py::arg("pump_intensity_mw_cm2") = 0.0, py::arg("chi2_pm_v") = 32.0)
      .def_readwrite("lambda1_um", &OpticalSetup::lambda1_um)
      .def_readwrite("lambda2_um", &OpticalSetup::lambda2_um)
      .def_readwrite("temperature_c", &OpticalSetup::temperature_c)
      .def_readwrite("pump_intensity_mw_cm2", &OpticalSetup::pump_intensity_mw_cm2)
      .def_property_readonly("lambda3_um", &OpticalSetup::lambda3_um);

  py::class_<CrystalSpec>(m, "CrystalSpec")
      .def(py::init([](double l, double pi, double pf) {
             CrystalSpec c{l, pi, pf, 0.0};
             c.validate();
             return c;
           }),
           py::arg("length_mm") = 20.0, py::arg("poling_initial_um") = 16.2, py::arg("poling_final_um") = 14.6)
      .def_readwrite("length_mm", &CrystalSpec::length_mm);

  m.def("primary_phase_mismatch", &primary_phase_mismatch, py::arg("setup"));
  m.def("coupling_from_intensity", &coupling_from_intensity, py::arg("setup"));
  m.def("pump_for_constant_coupling", &pump_for_constant_coupling, py::arg("q0"), py::arg("lambda1_um"),
        py::arg("setup"));

  py::class_<DriveProfile>(m, "DriveProfile")
      .def_property_readonly("scheme", &DriveProfile::scheme)
      .def_property_readonly("length", &DriveProfile::length)
      .def("delta_k", &DriveProfile::delta_k)
      .def("coupling", &DriveProfile::coupling)
      .def("coupling_y", &DriveProfile::coupling_y)
      .def("shifted", &DriveProfile::shifted);

  py::class_<AdiabaticLZDesign>(m, "AdiabaticLZDesign")
      .def_readonly("delta0", &AdiabaticLZDesign::delta0)
      .def_readonly("alpha", &AdiabaticLZDesign::alpha)
      .def_readonly("q0", &AdiabaticLZDesign::q0)
      .def_readonly("length", &AdiabaticLZDesign::length)
      .def_readonly("warnings", &AdiabaticLZDesign::warnings)
      .def("avoided_crossing", &AdiabaticLZDesign::avoided_crossing);
  m.def("make_lz_design", &make_lz_design, py::arg("delta0"), py::arg("alpha"), py::arg("q0"), py::arg("length"));
  m.def(
      "design_adiabatic",
      [](const CrystalSpec& c, const OpticalSetup& s, bool auto_center) {
        auto r = design_adiabatic(c, s, {auto_center});
        return py::make_tuple(r.profile, r.design);
      },
      py::arg("crystal"), py::arg("setup"), py::arg("auto_center") = true);
  m.def("lz_profile", &lz_profile);

  py::class_<CDDesign>(m, "CDDesign")
      .def(py::init<AdiabaticLZDesign>())
      .def("theta_dot", &CDDesign::theta_dot)
      .def("q_eff", &CDDesign::q_eff)
      .def("delta_k_eff", &CDDesign::delta_k_eff)
      .def("max_q_eff", &CDDesign::max_q_eff, py::arg("grid") = 4001)
      .def("effective_profile", &CDDesign::effective_profile)
      .def("two_field_profile", &CDDesign::two_field_profile)
      .def("reference_profile", &CDDesign::reference_profile);

  py::class_<InvariantDesign>(m, "InvariantDesign")
      .def_property_readonly("q0", &InvariantDesign::q0)
      .def_property_readonly("length", &InvariantDesign::length)
      .def_property_readonly("bound_value", &InvariantDesign::bound_value)
      .def_property_readonly("coeffs", &InvariantDesign::coeffs)
      .def("zeta", &InvariantDesign::zeta)
      .def("beta", &InvariantDesign::beta)
      .def("delta_k_opt", &InvariantDesign::delta_k_opt)
      .def("gamma_plus", &InvariantDesign::gamma_plus)
      .def("profile", &InvariantDesign::profile)
      .def("residuals", [](const InvariantDesign& d) {
        const auto r = d.residuals();
        return py::make_tuple(r.zeta_rate, r.beta_rate);
      });
  m.def("solve_zeta", &solve_zeta, py::arg("coeffs"), py::arg("q0") = py::none(), py::arg("length") = py::none());
  m.def("bound_value", &InvariantDesign::bound_value_for, py::arg("coeffs"));
  m.def("error_integral", &error_integral, py::arg("design"));
  m.def(
      "optimize_c1",
      [](double fixed, const std::string& unknown, double lo, double hi) {
        if (unknown != "length" && unknown != "q0") throw ValidationError("unknown must be 'length' or 'q0'");
        const auto o = optimize_c1(fixed, unknown == "length" ? BoundUnknown::length : BoundUnknown::q0, lo, hi);
        py::dict d;
        d["c1"] = o.c1;
        d["abs_integral"] = o.abs_integral;
        d["q0"] = o.q0;
        d["length"] = o.length;
        d["at_boundary"] = o.at_boundary;
        return d;
      },
      py::arg("fixed_value"), py::arg("unknown"), py::arg("lo") = -3.0, py::arg("hi") = 1.0);

  m.def(
      "propagate",
      [](const DriveProfile& p, double rel_tol, double abs_tol, std::size_t samples) {
        return trajectory_dict(propagate(p, {}, {rel_tol, abs_tol, samples}));
      },
      py::arg("profile"), py::arg("rel_tol") = 1e-9, py::arg("abs_tol") = 1e-12, py::arg("samples") = 501);

  m.def(
      "run_scenario_sweeps",
      [](const std::string& path, std::size_t workers) {
        const auto sc = cli::load_scenario(path);
        py::dict out;
        for (const auto& ns : sc.sweeps) {
          const auto r = run_sweep(ns.spec, sc.solver, workers);
          py::dict d;
          d["axis"] = r.axis_values;
          for (std::size_t f = 0; f < r.labels.size(); ++f) d[py::str(r.labels[f])] = r.efficiency[f];
          out[py::str(ns.name)] = d;
        }
        return out;
      },
      py::arg("scenario"), py::arg("workers") = 1);
}
