#include "vpfp/config.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <numbers>
#include <set>
#include <sstream>
#include <toml.hpp>

#include "vpfp/error.hpp"

namespace vpfp {

using nlohmann::json;

namespace {

const char* kValidPresets = "ap_sweep, nonuniform_perturbation, plasma_echo, two_stream, custom";

ExperimentConfig common_base() {
  ExperimentConfig c;
  c.mesh = {-6.0, 6.0, 128};
  c.equilibrium.temperature = 1.0;
  c.equilibrium.mean_density = 1.0;
  c.parameters["delta"] = 0.01;
  c.simulation.dt = 0.1;
  c.eps = {1.0};
  return c;
}

// --- json helpers -----------------------------------------------------------------------------

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where + ": expected a table");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!ok.count(key)) {
      std::string list;
      for (const auto& a : ok) list += (list.empty() ? "" : ", ") + a;
      throw ConfigError(where + ": unknown key '" + key + "' (allowed: " + list + ")");
    }
  }
}

double get_number(const json& j, const std::string& field) {
  if (!j.is_number()) throw ConfigError(field + ": expected a number");
  return j.get<double>();
}

int get_int(const json& j, const std::string& field) {
  if (j.is_number_integer()) return j.get<int>();
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (v == std::floor(v) && std::abs(v) < 2e9) return static_cast<int>(v);
  }
  throw ConfigError(field + ": expected an integer");
}

std::string get_string(const json& j, const std::string& field) {
  if (!j.is_string()) throw ConfigError(field + ": expected a string");
  return j.get<std::string>();
}

bool get_bool(const json& j, const std::string& field) {
  if (!j.is_boolean()) throw ConfigError(field + ": expected true or false");
  return j.get<bool>();
}

std::vector<double> get_number_list(const json& j, const std::string& field) {
  if (j.is_number()) return {j.get<double>()};
  if (!j.is_array()) throw ConfigError(field + ": expected a number or a list of numbers");
  std::vector<double> out;
  for (const auto& e : j) out.push_back(get_number(e, field));
  return out;
}

template <class F>
void if_present(const json& j, const char* key, F&& f) {
  if (auto it = j.find(key); it != j.end()) f(*it);
}

// --- toml -> json ---------------------------------------------------------------------------

json to_json(const toml::node& node) {
  if (const auto* t = node.as_table()) {
    json out = json::object();
    for (const auto& [k, v] : *t) out[std::string(k.str())] = to_json(v);
    return out;
  }
  if (const auto* a = node.as_array()) {
    json out = json::array();
    for (const auto& v : *a) out.push_back(to_json(v));
    return out;
  }
  if (const auto* v = node.as_integer()) return json(v->get());
  if (const auto* v = node.as_floating_point()) return json(v->get());
  if (const auto* v = node.as_boolean()) return json(v->get());
  if (const auto* v = node.as_string()) return json(v->get());
  std::ostringstream msg;
  msg << "unsupported TOML value at line " << node.source().begin.line << ", column "
      << node.source().begin.column;
  throw ConfigError(msg.str());
}

// --- json -> config ---------------------------------------------------------------------------

ExperimentConfig from_json(const json& root) {
  check_keys(root, "config", {"preset", "note", "qualitative", "parameters", "mesh", "equilibrium",
                              "initial", "simulation", "echo", "output"});
  std::string preset = "custom";
  if_present(root, "preset", [&](const json& v) { preset = get_string(v, "preset"); });
  const bool custom = preset == "custom";
  ExperimentConfig c = custom ? ExperimentConfig{} : preset_config(preset);
  if (custom) {
    for (const char* required : {"mesh", "equilibrium", "initial", "simulation"}) {
      if (!root.contains(required)) {
        throw ConfigError(std::string("custom config: missing table [") + required + "]");
      }
    }
  }

  if_present(root, "note", [&](const json& v) { c.note = get_string(v, "note"); });
  if_present(root, "qualitative", [&](const json& v) { c.qualitative = get_bool(v, "qualitative"); });
  if_present(root, "parameters", [&](const json& p) {
    if (!p.is_object()) throw ConfigError("parameters: expected a table");
    for (const auto& [k, v] : p.items()) c.parameters[k] = get_number(v, "parameters." + k);
  });
  if_present(root, "mesh", [&](const json& m) {
    check_keys(m, "mesh", {"a", "b", "n_cells"});
    if (custom) {
      for (const char* k : {"a", "b", "n_cells"}) {
        if (!m.contains(k)) throw ConfigError(std::string("mesh.") + k + ": required");
      }
    }
    if_present(m, "a", [&](const json& v) { c.mesh.a = get_number(v, "mesh.a"); });
    if_present(m, "b", [&](const json& v) { c.mesh.b = get_number(v, "mesh.b"); });
    if_present(m, "n_cells", [&](const json& v) { c.mesh.n_cells = get_int(v, "mesh.n_cells"); });
  });
  if_present(root, "equilibrium", [&](const json& e) {
    check_keys(e, "equilibrium", {"temperature", "mean_density", "potential", "ion_density",
                                  "ion_density_csv", "newton_tol", "newton_max_iter"});
    auto& q = c.equilibrium;
    if (e.contains("potential") || e.contains("ion_density") || e.contains("ion_density_csv")) {
      q.potential.clear();
      q.ion_density.clear();
      q.ion_density_csv.clear();
    }
    if_present(e, "temperature", [&](const json& v) { q.temperature = get_number(v, "equilibrium.temperature"); });
    if_present(e, "mean_density", [&](const json& v) { q.mean_density = get_number(v, "equilibrium.mean_density"); });
    if_present(e, "potential", [&](const json& v) { q.potential = get_string(v, "equilibrium.potential"); });
    if_present(e, "ion_density", [&](const json& v) { q.ion_density = get_string(v, "equilibrium.ion_density"); });
    if_present(e, "ion_density_csv", [&](const json& v) { q.ion_density_csv = get_string(v, "equilibrium.ion_density_csv"); });
    if_present(e, "newton_tol", [&](const json& v) { q.newton_tol = get_number(v, "equilibrium.newton_tol"); });
    if_present(e, "newton_max_iter", [&](const json& v) { q.newton_max_iter = get_int(v, "equilibrium.newton_max_iter"); });
  });
  if_present(root, "initial", [&](const json& i) {
    check_keys(i, "initial", {"modes", "maxwellian", "quad_order"});
    if (i.contains("modes") || i.contains("maxwellian")) {
      c.initial.modes.clear();
      c.initial.maxwellian.clear();
    }
    if_present(i, "modes", [&](const json& v) {
      if (!v.is_array()) throw ConfigError("initial.modes: expected a list of expressions");
      for (const auto& e : v) c.initial.modes.push_back(get_string(e, "initial.modes"));
    });
    if_present(i, "maxwellian", [&](const json& v) { c.initial.maxwellian = get_string(v, "initial.maxwellian"); });
    if_present(i, "quad_order", [&](const json& v) { c.initial.quad_order = get_int(v, "initial.quad_order"); });
  });
  if_present(root, "simulation", [&](const json& s) {
    check_keys(s, "simulation",
               {"eps", "tau0", "integrator", "dt", "t_start", "t_end", "n_modes", "diag_every",
                "snapshot_times", "linear_scheme", "nonlinear_scheme", "backend",
                "pivot_threshold", "equilibrate", "beta0", "high_tau0_n_modes",
                "high_tau0_threshold"});
    if (custom) {
      for (const char* k : {"eps", "tau0", "integrator", "dt", "t_end", "n_modes"}) {
        if (!s.contains(k)) throw ConfigError(std::string("simulation.") + k + ": required");
      }
    }
    auto& p = c.simulation;
    if_present(s, "eps", [&](const json& v) { c.eps = get_number_list(v, "simulation.eps"); });
    if_present(s, "tau0", [&](const json& v) { c.tau0 = get_number_list(v, "simulation.tau0"); });
    if_present(s, "integrator", [&](const json& v) {
      c.integrators.clear();
      if (v.is_string()) {
        c.integrators.push_back(parse_integrator(v.get<std::string>()));
      } else if (v.is_array()) {
        for (const auto& e : v) c.integrators.push_back(parse_integrator(get_string(e, "simulation.integrator")));
      } else {
        throw ConfigError("simulation.integrator: expected a string or a list of strings");
      }
    });
    if_present(s, "dt", [&](const json& v) { p.dt = get_number(v, "simulation.dt"); });
    if_present(s, "t_start", [&](const json& v) { p.t_start = get_number(v, "simulation.t_start"); });
    if_present(s, "t_end", [&](const json& v) { p.t_end = get_number(v, "simulation.t_end"); });
    if_present(s, "n_modes", [&](const json& v) { p.n_modes = get_int(v, "simulation.n_modes"); });
    if_present(s, "diag_every", [&](const json& v) { p.diag_every = get_int(v, "simulation.diag_every"); });
    if_present(s, "snapshot_times", [&](const json& v) { p.snapshot_times = get_number_list(v, "simulation.snapshot_times"); });
    if_present(s, "linear_scheme", [&](const json& v) {
      const std::string x = get_string(v, "simulation.linear_scheme");
      p.linear_scheme = x == "auto" ? std::nullopt : std::optional(parse_linear_scheme(x));
    });
    if_present(s, "nonlinear_scheme", [&](const json& v) {
      const std::string x = get_string(v, "simulation.nonlinear_scheme");
      if (x == "auto") p.nonlinear_scheme.reset();
      else if (x == "backward_euler") p.nonlinear_scheme = NonlinearScheme::backward_euler;
      else if (x == "trapezoidal") p.nonlinear_scheme = NonlinearScheme::trapezoidal;
      else throw ConfigError("simulation.nonlinear_scheme: expected auto, backward_euler or trapezoidal");
    });
    if_present(s, "backend", [&](const json& v) { p.backend = parse_linear_backend(get_string(v, "simulation.backend")); });
    if_present(s, "pivot_threshold", [&](const json& v) { p.pivot_threshold = get_number(v, "simulation.pivot_threshold"); });
    if_present(s, "equilibrate", [&](const json& v) {
      if (v.is_string() && v.get<std::string>() == "auto") p.equilibrate.reset();
      else p.equilibrate = get_bool(v, "simulation.equilibrate");
    });
    if_present(s, "beta0", [&](const json& v) {
      if (v.is_number()) {
        std::ostringstream os;
        os << std::setprecision(17) << v.get<double>();
        c.beta0 = os.str();
      } else {
        const std::string x = get_string(v, "simulation.beta0");
        c.beta0 = x == "off" ? "" : x;
      }
    });
    if_present(s, "high_tau0_n_modes", [&](const json& v) { c.high_tau0_n_modes = get_int(v, "simulation.high_tau0_n_modes"); });
    if_present(s, "high_tau0_threshold", [&](const json& v) { c.high_tau0_threshold = get_number(v, "simulation.high_tau0_threshold"); });
  });
  if_present(root, "echo", [&](const json& e) {
    check_keys(e, "echo", {"enabled", "delta", "k1", "k2", "t0"});
    if_present(e, "enabled", [&](const json& v) { c.echo.enabled = get_bool(v, "echo.enabled"); });
    if_present(e, "delta", [&](const json& v) { c.echo.delta = get_number(v, "echo.delta"); });
    if_present(e, "k1", [&](const json& v) { c.echo.k1 = get_number(v, "echo.k1"); });
    if_present(e, "k2", [&](const json& v) { c.echo.k2 = get_number(v, "echo.k2"); });
    if_present(e, "t0", [&](const json& v) { c.echo.t0 = get_number(v, "echo.t0"); });
  });
  if_present(root, "output", [&](const json& o) {
    check_keys(o, "output", {"snapshot_format", "v_min", "v_max", "n_v", "one_step_summary"});
    if_present(o, "snapshot_format", [&](const json& v) { c.output.snapshot_format = get_string(v, "output.snapshot_format"); });
    if_present(o, "v_min", [&](const json& v) { c.output.v_min = get_number(v, "output.v_min"); });
    if_present(o, "v_max", [&](const json& v) { c.output.v_max = get_number(v, "output.v_max"); });
    if_present(o, "n_v", [&](const json& v) { c.output.n_v = get_int(v, "output.n_v"); });
    if_present(o, "one_step_summary", [&](const json& v) { c.output.one_step_summary = get_bool(v, "output.one_step_summary"); });
  });
  c.preset = preset;
  validate(c);
  return c;
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"ap_sweep", "nonuniform_perturbation",
                                                 "plasma_echo", "two_stream"};
  return names;
}

ExperimentConfig preset_config(const std::string& name, bool desk) {
  ExperimentConfig c = common_base();
  c.preset = name;
  if (name == "ap_sweep") {
    c.equilibrium.potential = "0.2*sin(pi*x/L)";
    c.initial.modes = {"rho_inf + delta*cos(pi*x/L)"};
    c.simulation.n_modes = 80;
    c.simulation.t_end = 100.0;
    c.eps = {1.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
    c.tau0 = {1e5};
    c.integrators = {IntegratorKind::strang};
    c.output.one_step_summary = true;
  } else if (name == "nonuniform_perturbation") {
    c.equilibrium.potential = "0.2*sin(pi*x/L)";
    c.initial.modes = {"rho_inf + delta*cos(pi*x/L)"};
    c.simulation.n_modes = 50;
    c.high_tau0_n_modes = 400;
    c.high_tau0_threshold = 1e3;
    c.simulation.t_end = 100.0;
    c.simulation.snapshot_times = {4, 8, 16, 30, 40, 70};
    c.tau0 = {1.0, 1e1, 1e2, 1e3, 1e4};
    c.integrators = {IntegratorKind::strang, IntegratorKind::linearized};
    c.simulation.linear_scheme = LinearScheme::sdirk2;
  } else if (name == "plasma_echo") {
    const double k1 = std::numbers::pi / 6.0;
    c.equilibrium.potential = "0";
    c.parameters["k1"] = k1;
    c.parameters["k2"] = 2.0 * k1;
    c.initial.modes = {"1 + delta*cos(k1*x)"};
    c.simulation.n_modes = desk ? 800 : 8000;
    c.simulation.t_end = 120.0;
    c.simulation.snapshot_times = {0, 20, 30, 40, 50};
    c.tau0 = {1e6};
    c.integrators = {IntegratorKind::strang, IntegratorKind::linearized};
    c.simulation.linear_scheme = LinearScheme::sdirk2;
    c.echo = {true, 0.01, k1, 2.0 * k1, -30.0};
    c.qualitative = desk;
    if (desk) c.note = "desk mode: N_H = 800 instead of 8000, results are qualitative";
  } else if (name == "two_stream") {
    c.equilibrium.potential = "0.1*(1 - cos(pi*x/L))";
    c.initial.modes = {"1 + delta*cos(pi*x/L)", "0", "5*sqrt(2)/6*(1 + delta*cos(pi*x/L))"};
    c.simulation.n_modes = 800;
    c.simulation.t_end = 60.0;
    c.simulation.snapshot_times = {8, 16, 30, 60};
    c.tau0 = {1.0, 1e1, 1e2, 1e3, 1e4, 1e5, 1e6};
    c.integrators = {IntegratorKind::strang};
  } else if (name == "custom") {
    return ExperimentConfig{};
  } else {
    throw ConfigError("unknown preset '" + name + "' (valid: " + kValidPresets + ")");
  }
  return c;
}

void validate(const ExperimentConfig& c) {
  if (!(c.mesh.a < c.mesh.b)) throw ConfigError("mesh: require a < b");
  if (c.mesh.n_cells < 3) throw ConfigError("mesh.n_cells: must be >= 3");
  const auto& e = c.equilibrium;
  const int sources = !e.potential.empty() + !e.ion_density.empty() + !e.ion_density_csv.empty();
  if (sources != 1) {
    throw ConfigError("equilibrium: give exactly one of potential, ion_density, ion_density_csv");
  }
  if (!(e.temperature > 0.0)) throw ConfigError("equilibrium.temperature: must be positive");
  if (!(e.mean_density > 0.0)) throw ConfigError("equilibrium.mean_density: must be positive");
  if (c.initial.modes.empty() == c.initial.maxwellian.empty()) {
    throw ConfigError("initial: give exactly one of modes, maxwellian");
  }
  if (c.eps.empty() || c.tau0.empty() || c.integrators.empty()) {
    throw ConfigError("simulation: eps, tau0 and integrator lists must be non-empty");
  }
  for (double v : c.eps) if (!(v > 0.0)) throw ConfigError("simulation.eps: values must be positive");
  for (double v : c.tau0) if (!(v > 0.0)) throw ConfigError("simulation.tau0: values must be positive");
  const auto& s = c.simulation;
  if (!(s.dt > 0.0)) throw ConfigError("simulation.dt: must be positive");
  if (s.n_modes < 1) throw ConfigError("simulation.n_modes: must be >= 1");
  if (s.diag_every < 1) throw ConfigError("simulation.diag_every: must be >= 1");
  const double t_begin = c.echo.enabled ? 0.0 : s.t_start;
  if (!(s.t_end > t_begin)) throw ConfigError("simulation.t_end: must exceed the start time");
  for (double t : s.snapshot_times) {
    if (t < (c.echo.enabled ? c.echo.t0 : s.t_start) || t > s.t_end) {
      throw ConfigError("simulation.snapshot_times: " + std::to_string(t) + " outside the run");
    }
  }
  if (!(s.pivot_threshold >= 0.0 && s.pivot_threshold <= 1.0)) {
    throw ConfigError("simulation.pivot_threshold: must lie in [0, 1]");
  }
  if (!c.beta0.empty() && c.beta0 != "auto") {
    char* end = nullptr;
    const double b = std::strtod(c.beta0.c_str(), &end);
    if (*end != '\0' || !(b > 0.0)) throw ConfigError("simulation.beta0: expected \"auto\", \"off\" or a positive number");
  }
  if (c.output.snapshot_format != "csv" && c.output.snapshot_format != "binary") {
    throw ConfigError("output.snapshot_format: expected csv or binary");
  }
  if (c.output.n_v < 1 || !(c.output.v_min < c.output.v_max)) {
    throw ConfigError("output: need n_v >= 1 and v_min < v_max");
  }
  if (c.echo.enabled && (!(c.echo.k1 != 0.0) || !(c.echo.k2 != 0.0))) {
    throw ConfigError("echo: k1 and k2 must be non-zero");
  }
}

ExperimentConfig parse_config_toml(const std::string& text, const std::string& source) {
  toml::table table;
  try {
    table = toml::parse(text, source);
  } catch (const toml::parse_error& err) {
    std::ostringstream msg;
    msg << source << ":" << err.source().begin.line << ":" << err.source().begin.column
        << ": TOML parse error: " << err.description();
    throw ConfigError(msg.str());
  }
  return from_json(to_json(table));
}

ExperimentConfig parse_config_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& err) {
    throw ConfigError(std::string("JSON parse error: ") + err.what());
  }
  if (j.is_object() && j.contains("manifest_version")) {
    if (!j.contains("config")) throw ConfigError("manifest has no config entry");
    return from_json(j["config"]);
  }
  return from_json(j);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  if (path.extension() == ".json") return parse_config_json(buf.str());
  return parse_config_toml(buf.str(), path.string());
}

std::string config_to_json(const ExperimentConfig& c, int indent) {
  json j;
  j["preset"] = "custom";
  if (!c.note.empty()) j["note"] = c.note;
  j["qualitative"] = c.qualitative;
  j["parameters"] = json::object();
  for (const auto& [k, v] : c.parameters) j["parameters"][k] = v;
  j["mesh"] = {{"a", c.mesh.a}, {"b", c.mesh.b}, {"n_cells", c.mesh.n_cells}};
  json e = {{"temperature", c.equilibrium.temperature},
            {"mean_density", c.equilibrium.mean_density},
            {"newton_tol", c.equilibrium.newton_tol},
            {"newton_max_iter", c.equilibrium.newton_max_iter}};
  if (!c.equilibrium.potential.empty()) e["potential"] = c.equilibrium.potential;
  if (!c.equilibrium.ion_density.empty()) e["ion_density"] = c.equilibrium.ion_density;
  if (!c.equilibrium.ion_density_csv.empty()) e["ion_density_csv"] = c.equilibrium.ion_density_csv;
  j["equilibrium"] = e;
  json i = {{"quad_order", c.initial.quad_order}};
  if (!c.initial.modes.empty()) i["modes"] = c.initial.modes;
  if (!c.initial.maxwellian.empty()) i["maxwellian"] = c.initial.maxwellian;
  j["initial"] = i;
  const auto& s = c.simulation;
  json sim;
  sim["eps"] = c.eps;
  sim["tau0"] = c.tau0;
  json integ = json::array();
  for (auto k : c.integrators) integ.push_back(to_string(k));
  sim["integrator"] = integ;
  sim["dt"] = s.dt;
  sim["t_start"] = s.t_start;
  sim["t_end"] = s.t_end;
  sim["n_modes"] = s.n_modes;
  sim["diag_every"] = s.diag_every;
  sim["snapshot_times"] = s.snapshot_times;
  sim["linear_scheme"] = s.linear_scheme ? to_string(*s.linear_scheme) : "auto";
  sim["nonlinear_scheme"] = s.nonlinear_scheme ? to_string(*s.nonlinear_scheme) : "auto";
  sim["backend"] = to_string(s.backend);
  sim["pivot_threshold"] = s.pivot_threshold;
  if (s.equilibrate) sim["equilibrate"] = *s.equilibrate;
  else sim["equilibrate"] = "auto";
  sim["beta0"] = c.beta0.empty() ? "off" : c.beta0;
  sim["high_tau0_n_modes"] = c.high_tau0_n_modes;
  sim["high_tau0_threshold"] = c.high_tau0_threshold;
  j["simulation"] = sim;
  j["echo"] = {{"enabled", c.echo.enabled}, {"delta", c.echo.delta}, {"k1", c.echo.k1},
               {"k2", c.echo.k2}, {"t0", c.echo.t0}};
  j["output"] = {{"snapshot_format", c.output.snapshot_format}, {"v_min", c.output.v_min},
                 {"v_max", c.output.v_max}, {"n_v", c.output.n_v},
                 {"one_step_summary", c.output.one_step_summary}};
  return j.dump(indent);
}

}  // namespace vpfp
