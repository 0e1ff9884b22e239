#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <numbers>

#include "vpfp/config.hpp"
#include "vpfp/error.hpp"
#include "vpfp/expression.hpp"

using namespace vpfp;

TEST_CASE("expressions") {
  const auto e = Expression::parse("0.2*sin(pi*x/L)", {"x"}, {{"L", 6.0}});
  CHECK(e({3.0}) == doctest::Approx(0.2));
  CHECK(Expression::parse("-2^2", {})({}) == -4.0);
  CHECK(Expression::parse("2^3^2", {})({}) == 512.0);
  CHECK(Expression::parse("(1 + 2) * 3 - 4 / 8", {})({}) == 8.5);
  CHECK(Expression::parse("5*sqrt(2)/6*(1 + delta*cos(x))", {"x"}, {{"delta", 0.0}})({1.0}) ==
        doctest::Approx(5.0 * std::sqrt(2.0) / 6.0));
  CHECK(Expression::parse("exp(log(3)) + abs(-1) + tanh(0) + cosh(0) + sinh(0) + tan(0)", {})({}) ==
        doctest::Approx(5.0));
  CHECK(Expression::parse("1e-2 * 3.5E1", {})({}) == doctest::Approx(0.35));
  const auto h = Expression::parse("x*v", {"x", "v"});
  CHECK(h({2.0, 3.0}) == 6.0);
  CHECK(h.uses(0));
  CHECK_FALSE(Expression::parse("v", {"x", "v"}).uses(0));
}

TEST_CASE("expression errors name the column") {
  CHECK_THROWS_AS(Expression::parse("1 +", {}), ConfigError);
  CHECK_THROWS_AS(Expression::parse("foo(1)", {}), ConfigError);
  CHECK_THROWS_AS(Expression::parse("y", {"x"}), ConfigError);
  CHECK_THROWS_AS(Expression::parse("(1", {}), ConfigError);
  try {
    Expression::parse("1 + * 2", {});
  } catch (const ConfigError& err) {
    CHECK(std::string(err.what()).find("column") != std::string::npos);
  }
}

TEST_CASE("presets") {
  const auto ts = preset_config("two_stream");
  CHECK(ts.mesh.n_cells == 128);
  CHECK(ts.simulation.dt == 0.1);
  CHECK(ts.simulation.n_modes == 800);
  CHECK(ts.parameters.at("delta") == 0.01);
  CHECK(ts.equilibrium.potential == "0.1*(1 - cos(pi*x/L))");
  CHECK(ts.mesh.b - ts.mesh.a == 12.0);

  const auto echo = preset_config("plasma_echo");
  CHECK(echo.tau0 == std::vector<double>{1e6});
  CHECK(echo.simulation.n_modes == 8000);
  CHECK(echo.echo.k1 == doctest::Approx(std::numbers::pi / 6.0));
  CHECK(echo.echo.k2 == doctest::Approx(2.0 * echo.echo.k1));
  CHECK(echo.echo.t0 == -30.0);
  CHECK_FALSE(echo.qualitative);
  const auto desk = preset_config("plasma_echo", true);
  CHECK(desk.simulation.n_modes == 800);
  CHECK(desk.qualitative);

  const auto ap = preset_config("ap_sweep");
  CHECK(ap.eps.size() == 7);
  CHECK(ap.eps.front() == 1.0);
  CHECK(ap.eps.back() == 1e-6);
  CHECK(ap.tau0 == std::vector<double>{1e5});
  CHECK(ap.simulation.n_modes == 80);
  CHECK(ap.equilibrium.potential == "0.2*sin(pi*x/L)");

  const auto nu = preset_config("nonuniform_perturbation");
  CHECK(nu.tau0 == std::vector<double>{1.0, 10.0, 100.0, 1000.0, 10000.0});

  for (const auto& name : preset_names()) CHECK_NOTHROW(validate(preset_config(name)));
  try {
    preset_config("landau");
    FAIL("expected ConfigError");
  } catch (const ConfigError& err) {
    CHECK(std::string(err.what()).find("two_stream") != std::string::npos);
  }
}

TEST_CASE("TOML overrides on a preset") {
  const auto c = parse_config_toml(R"(
preset = "two_stream"
[simulation]
n_modes = 100
tau0 = [1.0, 10.0]
integrator = "lie"
[parameters]
delta = 0.05
)");
  CHECK(c.simulation.n_modes == 100);
  CHECK(c.tau0 == std::vector<double>{1.0, 10.0});
  CHECK(c.integrators == std::vector<IntegratorKind>{IntegratorKind::lie});
  CHECK(c.parameters.at("delta") == 0.05);
  CHECK(c.mesh.n_cells == 128);
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse_config_toml("preset = \"two_stream\"\n[simulation]\nn_mode = 4\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_toml("preset = \"custom\"\n[mesh]\na = 0\nb = 1\nn_cells = 8\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_toml("preset = \"nope\"\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_toml("preset = \"two_stream\"\n[mesh]\nn_cells = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_toml("preset = \"two_stream\"\n[simulation]\ndt = \"x\"\n"), ConfigError);
  try {
    parse_config_toml("preset = \"two_stream\"\n[simulation\n", "bad.toml");
    FAIL("expected ConfigError");
  } catch (const ConfigError& err) {
    CHECK(std::string(err.what()).find("bad.toml:2:") != std::string::npos);
  }
  try {
    parse_config_toml("preset = \"two_stream\"\n[simulation]\nbogus = 1\n");
  } catch (const ConfigError& err) {
    CHECK(std::string(err.what()).find("simulation") != std::string::npos);
    CHECK(std::string(err.what()).find("bogus") != std::string::npos);
  }
  CHECK_THROWS_AS(load_config("/nonexistent/config.toml"), IoError);
}

TEST_CASE("custom config and JSON round trip") {
  const std::string toml = R"toml(
preset = "custom"
[mesh]
a = -1.0
b = 1.0
n_cells = 10
[equilibrium]
ion_density = "1 + 0.2*cos(pi*x)"
[initial]
maxwellian = "1 + 0.1*cos(pi*x)*v"
[simulation]
eps = 0.5
tau0 = 3.0
integrator = ["strang", "linearized"]
dt = 0.05
t_end = 1.0
n_modes = 12
snapshot_times = [0.5]
beta0 = "auto"
equilibrate = false
[output]
snapshot_format = "binary"
)toml";
  const auto c = parse_config_toml(toml);
  CHECK(c.equilibrium.ion_density == "1 + 0.2*cos(pi*x)");
  CHECK(c.integrators.size() == 2);
  CHECK(c.simulation.equilibrate == std::optional<bool>(false));
  CHECK(c.beta0 == "auto");

  const std::string j1 = config_to_json(c);
  const auto back = parse_config_json(j1);
  CHECK(config_to_json(back) == j1);

  const auto dir = std::filesystem::temp_directory_path() / "vpfp_unit_cfg";
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "c.toml") << toml;
    nlohmann::json manifest = {{"manifest_version", 1}, {"config", nlohmann::json::parse(j1)}};
    std::ofstream(dir / "manifest.json") << manifest.dump();
  }
  CHECK(config_to_json(load_config(dir / "c.toml")) == j1);
  CHECK(config_to_json(load_config(dir / "manifest.json")) == j1);
  std::filesystem::remove_all(dir);
}
