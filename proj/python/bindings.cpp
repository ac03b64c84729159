#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "airfed/algorithms.hpp"
#include "airfed/channel.hpp"
#include "airfed/config.hpp"
#include "airfed/errors.hpp"
#include "airfed/experiment.hpp"
#include "airfed/problems.hpp"
#include "airfed/theory.hpp"
#include "airfed/validation.hpp"

namespace py = pybind11;
using namespace airfed;

PYBIND11_MODULE(_airfed, m) {
  m.doc() = "Federated least squares over a fading multiple-access channel";

  py::register_exception<Error>(m, "AirfedError", PyExc_RuntimeError);

  py::enum_<Stream>(m, "Stream")
      .value("generic", Stream::generic)
      .value("problem", Stream::problem)
      .value("channel", Stream::channel)
      .value("validation", Stream::validation);

  py::class_<Rng>(m, "Rng")
      .def(py::init<std::uint64_t, Stream>(), py::arg("seed"), py::arg("stream") = Stream::generic)
      .def("normal", &Rng::normal)
      .def("uniform", &Rng::uniform);

  // problems
  py::enum_<Conditioning>(m, "Conditioning")
      .value("well", Conditioning::well)
      .value("ill", Conditioning::ill);

  py::class_<GenConfig>(m, "GenConfig")
      .def(py::init<>())
      .def_readwrite("n_devices", &GenConfig::n_devices)
      .def_readwrite("samples_per_device", &GenConfig::samples_per_device)
      .def_readwrite("dim", &GenConfig::dim)
      .def_readwrite("data_noise_var", &GenConfig::data_noise_var)
      .def_readwrite("conditioning", &GenConfig::conditioning)
      .def_readwrite("kappa_target", &GenConfig::kappa_target);

  py::class_<DeviceProblem>(m, "DeviceProblem")
      .def(py::init<RealMatrix, RealVector>(), py::arg("design"), py::arg("targets"))
      .def_property_readonly("design", &DeviceProblem::design)
      .def_property_readonly("targets", &DeviceProblem::targets)
      .def_property_readonly("gram", &DeviceProblem::gram)
      .def_property_readonly("moment", &DeviceProblem::moment)
      .def_property_readonly("ell", &DeviceProblem::ell)
      .def_property_readonly("lip", &DeviceProblem::lip);

  py::class_<FederatedProblem>(m, "FederatedProblem")
      .def_property_readonly("devices", &FederatedProblem::devices)
      .def_property_readonly("theta_star", &FederatedProblem::theta_star)
      .def_property_readonly("theta_true", &FederatedProblem::theta_true)
      .def_property_readonly("ell_star", &FederatedProblem::ell_star)
      .def_property_readonly("lip_star", &FederatedProblem::lip_star)
      .def_property_readonly("lip_sum", &FederatedProblem::lip_sum)
      .def_property_readonly("kappa", &FederatedProblem::kappa)
      .def_property_readonly("hessian", &FederatedProblem::hessian)
      .def("default_step", &FederatedProblem::default_step)
      .def("__len__", &FederatedProblem::size);

  m.def("gen_problem", &gen_problem, py::arg("cfg"), py::arg("rng"));
  m.def("prox", &prox, py::arg("device"), py::arg("step"), py::arg("z"));
  m.def("optimality_gap", &optimality_gap, py::arg("problem"), py::arg("theta"));
  m.def("global_loss", &global_loss, py::arg("problem"), py::arg("theta"));
  m.def("global_optimum",
        [](const std::vector<DeviceProblem>& devs) { return global_optimum(devs); },
        py::arg("devices"));
  m.def("fixed_points", &fixed_points, py::arg("problem"), py::arg("step"));

  // channel
  py::enum_<SelectionMode>(m, "SelectionMode")
      .value("threshold_only", SelectionMode::threshold_only)
      .value("top_b", SelectionMode::top_b)
      .value("with_replacement", SelectionMode::with_replacement);

  py::class_<ChannelParams>(m, "ChannelParams")
      .def(py::init<>())
      .def_readwrite("noise_var", &ChannelParams::noise_var)
      .def_readwrite("threshold", &ChannelParams::threshold)
      .def_readwrite("max_power", &ChannelParams::max_power)
      .def_readwrite("mode", &ChannelParams::mode)
      .def_readwrite("b", &ChannelParams::b);

  py::class_<AggregationOutcome>(m, "AggregationOutcome")
      .def_property_readonly("selected", [](const AggregationOutcome& o) { return o.round.selected; })
      .def_property_readonly("alpha", [](const AggregationOutcome& o) { return o.round.alpha; })
      .def_property_readonly("deferred", [](const AggregationOutcome& o) { return o.round.deferred; })
      .def_property_readonly("estimate",
                             [](const AggregationOutcome& o) -> std::optional<RealVector> {
                               if (!o.recovered) return std::nullopt;
                               return o.recovered->estimate;
                             })
      .def_readonly("max_tx_power", &AggregationOutcome::max_tx_power);

  m.def("aircomp_aggregate",
        [](const std::vector<RealVector>& payloads, const ChannelParams& p, Rng& rng, std::size_t t) {
          return aircomp_aggregate(payloads, p, rng, t);
        },
        py::arg("payloads"), py::arg("params"), py::arg("rng"), py::arg("round_index") = 0);
  m.def("equivalent_noise_norm_expect", &equivalent_noise_norm_expect, py::arg("alpha"),
        py::arg("b"), py::arg("noise_var"), py::arg("d"));

  // theory
  m.def("contraction_factor", &theory::contraction_factor, py::arg("kappa"));
  m.def("theorem1_bound", &theory::theorem1_bound, py::arg("delta0"), py::arg("kappa"), py::arg("t"));
  m.def("iteration_complexity",
        [](double eps, double kappa, double delta0) {
          const auto c = theory::iteration_complexity(eps, kappa, delta0);
          return py::make_tuple(c.exact, c.asymptotic);
        },
        py::arg("eps"), py::arg("kappa"), py::arg("delta0") = 1.0);

  // harness
  py::class_<AggregateResult>(m, "AggregateResult")
      .def_readonly("label", &AggregateResult::label)
      .def_readonly("trials", &AggregateResult::trials)
      .def_readonly("initial_gap", &AggregateResult::initial_gap)
      .def_readonly("final_mean_gap", &AggregateResult::final_mean_gap)
      .def_readonly("measured_g", &AggregateResult::measured_g)
      .def_readonly("delta0", &AggregateResult::delta0)
      .def_readonly("kappa", &AggregateResult::kappa)
      .def_property_readonly("mean_gap", [](const AggregateResult& r) {
        std::vector<double> v;
        for (const auto& row : r.rows) v.push_back(row.mean_gap);
        return v;
      })
      .def("to_csv", &format_csv);

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def_readwrite("rounds", &ExperimentConfig::rounds)
      .def_readwrite("trials", &ExperimentConfig::trials)
      .def_readwrite("seed", &ExperimentConfig::seed)
      .def_readwrite("jobs", &ExperimentConfig::jobs)
      .def_readwrite("output_dir", &ExperimentConfig::output_dir)
      .def("set", &apply_override, py::arg("key"), py::arg("value"))
      .def("render", &render_config, py::arg("include_runtime") = true);

  m.def("parse_config", &parse_config, py::arg("text"));
  m.def("load_config", &load_config, py::arg("path"));
  m.def("run_experiment", &run_experiment, py::arg("cfg"), py::call_guard<py::gil_scoped_release>());
  m.def("sweep_kappa",
        [](const ExperimentConfig& cfg, const std::vector<double>& ks) { return sweep_kappa(cfg, ks); },
        py::arg("cfg"), py::arg("kappas"), py::call_guard<py::gil_scoped_release>());
  m.def("validate",
        [](const std::string& suite, std::uint64_t seed) {
          const auto report = validation::run_suite(validation::parse_suite(suite), seed);
          return py::make_tuple(report.passed(), report.format());
        },
        py::arg("suite"), py::arg("seed") = 1);
}
