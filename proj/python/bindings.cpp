#include <cstdio>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "vpfp/config.hpp"
#include "vpfp/diagnostics.hpp"
#include "vpfp/error.hpp"
#include "vpfp/experiment.hpp"
#include "vpfp/hermite.hpp"
#include "vpfp/log.hpp"
#include "vpfp/quadrature.hpp"

namespace py = pybind11;
using namespace vpfp;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) {
  return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
}

py::list run(const std::string& config_json, const std::filesystem::path& out_dir, int threads,
             bool dump_matrix, bool quiet) {
  const ExperimentConfig cfg = parse_config_json(config_json);
  ExperimentOptions opts;
  opts.out_dir = out_dir;
  opts.threads = threads;
  opts.dump_matrix = dump_matrix;
  opts.progress = !quiet;
  std::vector<RunOutcome> outcomes;
  {
    py::gil_scoped_release release;
    outcomes = run_experiment(cfg, opts);
  }
  py::list out;
  for (const auto& o : outcomes) {
    py::dict d;
    d["name"] = o.spec.name;
    d["eps"] = o.spec.eps;
    d["tau0"] = o.spec.tau0;
    d["n_modes"] = o.spec.n_modes;
    d["dir"] = o.dir;
    d["steps"] = o.steps;
    d["wall_seconds"] = o.wall_seconds;
    d["factorization_seconds"] = o.factorization_seconds;
    d["error"] = o.error;
    d["exit_code"] = o.exit_code;
    out.append(d);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_vpfp, m) {
  m.doc() = "Hermite / finite-volume Vlasov-Poisson-Fokker-Planck solver";
  m.attr("__version__") = VPFP_VERSION;

  // Later registrations are tried first, so the base class goes first.
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  m.def("preset_names", &preset_names);
  m.def(
      "preset_config",
      [](const std::string& name, bool desk) { return config_to_json(preset_config(name, desk)); },
      py::arg("name"), py::arg("desk") = false, "Preset configuration as a JSON string.");
  m.def(
      "load_config", [](const std::filesystem::path& p) { return config_to_json(load_config(p)); },
      py::arg("path"), "Reads a TOML config or a run manifest and returns it as JSON.");
  m.def(
      "validate_config", [](const std::string& js) { validate(parse_config_json(js)); },
      py::arg("config_json"));
  m.def("run", &run, py::arg("config_json"), py::arg("out_dir"), py::arg("threads") = 1,
        py::arg("dump_matrix") = false, py::arg("quiet") = true,
        "Runs every sweep entry of the config. Returns one dict per run.");

  m.def("csv_columns", &csv_columns);
  m.def(
      "gauss_hermite_normal",
      [](int n) {
        const QuadratureRule r = gauss_hermite_normal(n);
        return py::make_tuple(to_array(r.nodes), to_array(r.weights));
      },
      py::arg("n"));
  m.def("fit_decay_rate", &fit_decay_rate, py::arg("t"), py::arg("value"), py::arg("t_lo"),
        py::arg("t_hi"));
  m.def("fit_envelope_decay_rate", &fit_envelope_decay_rate, py::arg("t"), py::arg("value"),
        py::arg("t_lo"), py::arg("t_hi"));
  m.def(
      "read_snapshot_binary",
      [](const std::filesystem::path& p) {
        const Eigen::MatrixXd f = read_snapshot_binary(p);
        py::array_t<double> out({f.rows(), f.cols()});
        auto a = out.mutable_unchecked<2>();
        for (Eigen::Index i = 0; i < f.rows(); ++i)
          for (Eigen::Index j = 0; j < f.cols(); ++j) a(i, j) = f(i, j);
        return out;
      },
      py::arg("path"));
  m.def(
      "set_quiet",
      [](bool q) {
        if (q) set_log_sink([](const std::string&) {});
        else set_log_sink([](const std::string& msg) { std::fprintf(stderr, "vpfp: %s\n", msg.c_str()); });
      },
      py::arg("quiet") = true, "Silences library warnings.");
}
