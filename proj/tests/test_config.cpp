#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "deleg/config.hpp"
#include "deleg/measure.hpp"
#include "deleg/mech.hpp"
#include "deleg/report.hpp"
#include "helpers.hpp"

using namespace deleg;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(DELEG_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

fs::path source_config(const std::string& name) {
  return fs::path(DELEG_SOURCE_DIR) / "configs" / name;
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("parser handles sections, comments and errors") {
  std::istringstream in(
      "# header comment\n"
      "[problem]\n"
      "n = 1  # trailing comment\n"
      "alpha = 0.5\n"
      "\n"
      "[grid]\n"
      "cells = 99\n");
  const Config config = Config::parse(in);
  CHECK(config.get("problem", "n") == "1");
  CHECK(config.get_double("problem", "alpha") == 0.5);
  CHECK(config.get_long_or("grid", "cells", 0) == 99);
  CHECK(config.get_long_or("grid", "missing", 7) == 7);
  CHECK_THROWS_AS(config.get("problem", "missing"), std::invalid_argument);

  std::istringstream bad("[problem\nn = 1\n");
  CHECK_THROWS_AS(Config::parse(bad), std::invalid_argument);
  std::istringstream bad2("[problem]\njust a line\n");
  CHECK_THROWS_AS(Config::parse(bad2), std::invalid_argument);
}

TEST_CASE("bundled configs build valid problems") {
  const Config uniform = Config::parse_file(source_config("uniform1d.ini").string());
  const DelegationProblem p = problem_from_config(uniform);
  CHECK(p.n == 1);
  CHECK(p.bias.alpha == 0.5);
  CHECK(p.state_space.lo[0] == -0.5);

  const RunParams params = params_from_config(uniform);
  CHECK(params.grid_cells == 239);
  CHECK(params.rho == 3.0);

  const Config gauss = Config::parse_file(source_config("gauss1d.ini").string());
  const DelegationProblem pg = problem_from_config(gauss);  // validates normalization
  CHECK(pg.density_at(vec1(0.45)) > pg.density_at(vec1(0.99)));

  const Config square = Config::parse_file(source_config("uniform2d.ini").string());
  CHECK(problem_from_config(square).n == 2);
}

TEST_CASE("menu and mechanism serialization round trips") {
  const auto p = deleg::testing::uniform_linear(1, 0.5);
  Menu menu;
  menu.pieces.push_back({vec1(-1.0 / 6.0), -1.0 / 72.0});
  menu.pieces.push_back({vec1(0.123456789012345), -0.05});

  std::stringstream buffer;
  write_menu(buffer, menu);
  const Menu back = read_menu(buffer);
  REQUIRE(back.pieces.size() == menu.pieces.size());
  for (size_t k = 0; k < menu.pieces.size(); ++k) {
    CHECK(back.pieces[k].a[0] == menu.pieces[k].a[0]);
    CHECK(back.pieces[k].c == menu.pieces[k].c);
  }

  const Mechanism mech = build_mechanism(p, menu);
  std::stringstream mech_buffer;
  write_mechanism(mech_buffer, mech);
  const Mechanism mech_back = read_mechanism(mech_buffer);
  REQUIRE(mech_back.lotteries.size() == mech.lotteries.size());
  for (size_t k = 0; k < mech.lotteries.size(); ++k) {
    REQUIRE(mech_back.lotteries[k].atoms.size() == mech.lotteries[k].atoms.size());
    CHECK(mech_back.lotteries[k].mean()[0] == mech.lotteries[k].mean()[0]);
  }
}

TEST_CASE("json writer emits ordered fields with full precision") {
  JsonWriter json;
  json.begin_object();
  json.field("value", 1.0 / 3.0);
  json.field("flag", true);
  json.field("name", std::string("x\"y"));
  json.begin_array("items");
  json.element(1.5);
  json.element(2.5);
  json.end_array();
  json.end_object();
  CHECK(json.str() ==
        "{\"value\":0.33333333333333331,\"flag\":true,\"name\":\"x\\\"y\","
        "\"items\":[1.5,2.5]}");
}

TEST_CASE("cli: interval pipeline on the benchmark config") {
  const fs::path out = fs::temp_directory_path() / "deleg_cli_interval";
  fs::remove_all(out);
  const int code = run_cli("interval --config " + source_config("uniform1d.ini").string() +
                           " --out " + out.string() + " --cells 499");
  CHECK(code == 0);
  const std::string json = slurp(out / "interval.json");
  CHECK(json.find("\"verdict\":\"pass\"") != std::string::npos);
  // s2 ~ 1/6
  CHECK(json.find("\"s2\":0.1666") != std::string::npos);
  CHECK(fs::exists(out / "menu.txt"));
  CHECK(fs::exists(out / "mechanism.txt"));
}

TEST_CASE("cli: certify rejects a perturbed interval with exit code 3") {
  const fs::path out = fs::temp_directory_path() / "deleg_cli_certify";
  fs::remove_all(out);
  const int code = run_cli("certify --config " + source_config("uniform1d.ini").string() +
                           " --out " + out.string() +
                           " --cells 499 --s1 -0.3333333333333333 --s2 0.3333333333333333");
  CHECK(code == 3);
  const std::string json = slurp(out / "certificate.json");
  CHECK(json.find("\"interval_pass\":false") != std::string::npos);
}

TEST_CASE("cli: solve emits byte-identical artifacts across reruns") {
  const fs::path out_a = fs::temp_directory_path() / "deleg_cli_solve_a";
  const fs::path out_b = fs::temp_directory_path() / "deleg_cli_solve_b";
  fs::remove_all(out_a);
  fs::remove_all(out_b);
  const std::string base = "solve --config " + source_config("uniform1d.ini").string() +
                           " --cells 59 --out ";
  REQUIRE(run_cli(base + out_a.string()) == 0);
  REQUIRE(run_cli(base + out_b.string()) == 0);
  CHECK(slurp(out_a / "summary.json") == slurp(out_b / "summary.json"));
  CHECK(slurp(out_a / "solution.csv") == slurp(out_b / "solution.csv"));
}

TEST_CASE("cli: nu, figures and simulate produce their artifacts") {
  const fs::path out = fs::temp_directory_path() / "deleg_cli_misc";
  fs::remove_all(out);
  const std::string config = source_config("uniform1d.ini").string();

  REQUIRE(run_cli("nu --config " + config + " --out " + out.string() + " --cells 49") == 0);
  CHECK(slurp(out / "nu.csv").find("tag,nu,weight") != std::string::npos);

  REQUIRE(run_cli("figures --config " + config + " --out " + out.string() + " --cells 499") == 0);
  CHECK(fs::exists(out / "fig1_no_extension.csv"));
  CHECK(fs::exists(out / "fig2_indirect_utilities.csv"));
  CHECK(fs::exists(out / "fig3_tilt.csv"));
  CHECK(fs::exists(out / "fig4_convex_set_ray.csv"));

  REQUIRE(run_cli("simulate --config " + config + " --out " + out.string() +
                  " --cells 199 --s1 -0.16666666666666666 --s2 0.16666666666666666" +
                  " --seed 3 --threads 2") == 0);
  const std::string sim = slurp(out / "sim.json");
  CHECK(sim.find("\"kind\":\"interval\"") != std::string::npos);
  CHECK(sim.find("\"estimate\":") != std::string::npos);
}

TEST_CASE("cli: validation failures exit with code 1") {
  CHECK(run_cli("interval --config /nonexistent.ini") == 1);
  const fs::path bad = fs::temp_directory_path() / "deleg_bad.ini";
  std::ofstream(bad.string()) << "[problem]\nn = 1\nlo = 0.5\nhi = 0.5\nalpha = 1\n";
  CHECK(run_cli("interval --config " + bad.string()) == 1);
}

}  // TEST_SUITE
