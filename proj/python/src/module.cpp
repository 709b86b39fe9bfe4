#include <cmath>
#include <optional>
#include <string>

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "adbsim/analysis.hpp"
#include "adbsim/experiment.hpp"

namespace py = pybind11;
using namespace adb;

namespace {

py::array_t<double> column(const Trajectory& tr, double TrajectoryPoint::*field) {
  py::array_t<double> out(static_cast<py::ssize_t>(tr.points.size()));
  auto v = out.mutable_unchecked<1>();
  for (std::size_t i = 0; i < tr.points.size(); ++i) v(static_cast<py::ssize_t>(i)) = tr.points[i].*field;
  return out;
}

py::dict simulate(const ModelSpec& spec, const std::string& tier_name, double t_end, std::optional<double> dt,
                  double record_interval, std::optional<std::pair<double, double>> noise,
                  const std::string& initial, std::optional<double> fixed_tf) {
  RunRequest r;
  r.label = "python";
  r.tier = tier_from_string(tier_name);
  r.spec = spec;
  r.tag = classify(spec.r_p, spec.K1, spec.K2);
  r.initial_state = initial;
  r.fixed_tf = fixed_tf;
  const auto model = build_model(r.tier, spec);
  r.integrator.dt = dt ? *dt : default_dt(model, record_interval);
  r.integrator.t_end = t_end;
  r.integrator.record_stride = static_cast<std::size_t>(std::max(1.0, std::round(record_interval / r.integrator.dt)));
  r.integrator.audit_stride = r.integrator.record_stride * 10;
  if (noise) r.noise = NoiseSpec{noise->first, noise->second};

  RunOutput out;
  {
    py::gil_scoped_release release;
    out = execute(r);
  }
  const auto& tr = out.trajectory;
  py::array_t<double> xi1(static_cast<py::ssize_t>(tr.points.size())), xi2(static_cast<py::ssize_t>(tr.points.size())),
      vs(static_cast<py::ssize_t>(tr.points.size()));
  auto a = xi1.mutable_unchecked<1>(), b = xi2.mutable_unchecked<1>(), c = vs.mutable_unchecked<1>();
  for (std::size_t i = 0; i < tr.points.size(); ++i) {
    const auto k = static_cast<py::ssize_t>(i);
    a(k) = tr.points[i].controls.xi1;
    b(k) = tr.points[i].controls.xi2;
    c(k) = tr.points[i].v.S;
  }
  const auto& s = out.record.summary;
  py::dict d;
  d["t"] = column(tr, &TrajectoryPoint::t);
  d["P_S"] = column(tr, &TrajectoryPoint::P_S);
  d["P_T"] = column(tr, &TrajectoryPoint::P_T);
  d["P_gg"] = column(tr, &TrajectoryPoint::P_gg);
  d["P_ff"] = column(tr, &TrajectoryPoint::P_ff);
  d["P_D"] = column(tr, &TrajectoryPoint::P_D);
  d["xi1"] = xi1;
  d["xi2"] = xi2;
  d["V_S"] = vs;
  d["F"] = column(tr, &TrajectoryPoint::fidelity);
  d["fidelity"] = s.fidelity;
  d["t_f"] = s.t_f;
  d["t_S"] = s.t_S;
  d["T"] = s.T;
  d["scenario"] = to_string(s.scenario);
  d["warnings"] = s.warnings;
  d["fingerprint"] = out.record.fingerprint;
  return d;
}

std::string run_config(const std::string& text, std::size_t workers, std::optional<std::string> out_dir) {
  auto cfg = parse_config(text);
  if (out_dir) cfg.output_dir = *out_dir;
  std::vector<ResultRecord> records;
  {
    py::gil_scoped_release release;
    for (auto& r : run_scenario(cfg, workers)) records.push_back(std::move(r.record));
  }
  return summary_json(records);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Closed-loop Lindblad simulator for dissipative two-atom entanglement";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ModelError>(m, "ModelError", PyExc_ValueError);
  py::register_exception<IntegratorError>(m, "IntegratorError", PyExc_RuntimeError);

  py::class_<ModelSpec>(m, "ModelSpec")
      .def(py::init<>())
      .def_readwrite("g", &ModelSpec::g)
      .def_readwrite("kappa", &ModelSpec::kappa)
      .def_readwrite("gamma", &ModelSpec::gamma)
      .def_readwrite("omega0", &ModelSpec::omega0)
      .def_readwrite("omega0_mw", &ModelSpec::omega0_mw)
      .def_readwrite("delta", &ModelSpec::delta)
      .def_readwrite("r_p", &ModelSpec::r_p)
      .def_readwrite("theta_p", &ModelSpec::theta_p)
      .def_readwrite("r_e", &ModelSpec::r_e)
      .def_readwrite("theta_e", &ModelSpec::theta_e)
      .def_readwrite("K1", &ModelSpec::K1)
      .def_readwrite("K2", &ModelSpec::K2)
      .def_readwrite("fock_cutoff", &ModelSpec::fock_cutoff)
      .def_readwrite("delta_c", &ModelSpec::delta_c)
      .def_property_readonly("g_sc", &ModelSpec::g_sc)
      .def("validate", &ModelSpec::validate)
      .def("__eq__", [](const ModelSpec& a, const ModelSpec& b) { return a == b; });

  m.def("reference_spec", &reference_spec, py::arg("r_p"), py::arg("K1") = 0.0, py::arg("K2") = 0.0);

  m.def(
      "squeezing_parameters",
      [](double omega_p, double delta_c) {
        const auto p = squeezing_parameters(omega_p, delta_c);
        return py::dict(py::arg("r_p") = p.r_p, py::arg("omega_sc") = p.omega_sc, py::arg("alpha") = p.alpha);
      },
      py::arg("omega_p"), py::arg("delta_c"));
  m.def("pump_for_squeezing", &pump_for_squeezing, py::arg("r_p"), py::arg("delta_c"));
  m.def(
      "reservoir_coeffs",
      [](double r_p, double theta_p, double r_e, double theta_e) {
        const auto c = reservoir_coeffs(r_p, theta_p, r_e, theta_e);
        return std::make_pair(c.n, c.m);
      },
      py::arg("r_p"), py::arg("theta_p"), py::arg("r_e"), py::arg("theta_e"));
  m.def(
      "cooperativity",
      [](const ModelSpec& s) {
        const auto c = cooperativity_report(s);
        return py::dict(py::arg("C") = c.C, py::arg("C_sc") = c.C_sc, py::arg("ratio") = c.ratio);
      },
      py::arg("spec"));
  m.def("classify", [](double r_p, double K1, double K2) { return to_string(classify(r_p, K1, K2)); },
        py::arg("r_p"), py::arg("K1"), py::arg("K2"));

  m.def("simulate", &simulate, py::arg("spec"), py::arg("tier") = "effective", py::arg("t_end") = 600.0,
        py::arg("dt") = py::none(), py::arg("record_interval") = 1.0, py::arg("noise") = py::none(),
        py::arg("initial_state") = "gg", py::arg("fixed_tf") = py::none(),
        "Integrates the closed loop and returns the recorded series and summary.");
  m.def("run_config", &run_config, py::arg("text"), py::arg("workers") = 1, py::arg("out_dir") = py::none(),
        "Runs a flat key = value config and returns the summary as a JSON string.");
  m.attr("TIMESERIES_HEADER") = kTimeseriesHeader;
}
