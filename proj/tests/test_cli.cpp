#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include <json.hpp>

#include "sfgsta/cli.hpp"
#include "sfgsta/errors.hpp"
#include "support.hpp"

using namespace sfg;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("sfgsta_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json base_scenario(const nlohmann::json& scheme, double length_mm, double pump) {
  return {{"material_file", (test::source_dir() / "data" / "ktp_z.json").string()},
          {"setup", {{"lambda1_um", 1.535}, {"lambda2_um", 1.064}, {"temperature_c", 25.0}, {"pump_intensity_mw_cm2", pump}}},
          {"crystal", {{"length_mm", length_mm}, {"poling_initial_um", 16.2}, {"poling_final_um", 14.6}}},
          {"scheme", scheme},
          {"output", {{"directory", "out"}}}};
}

fs::path write_scenario(const fs::path& dir, const nlohmann::json& j) {
  const fs::path p = dir / "scenario.json";
  std::ofstream(p) << j.dump(2);
  return p;
}

struct Run {
  int code;
  std::string out, err;
};

template <class F>
Run run(F&& f, const cli::CommonOptions& o) {
  std::ostringstream out, err;
  const int code = f(o, out, err);
  return {code, out.str(), err.str()};
}

int shell(const std::string& cmd) {
  const int status = std::system((cmd + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("FNV-1a digest") {
    CHECK(cli::fnv1a64("") == "fnv1a64:cbf29ce484222325");
    CHECK(cli::fnv1a64("a") == "fnv1a64:af63dc4c8601ec8c");
  }

  TEST_CASE("scenario parsing errors carry field paths") {
    const fs::path dir = scratch("parse");
    auto j = base_scenario({{"adiabatic", nlohmann::json::object()}}, 20.0, 360.0);
    CHECK_NOTHROW(cli::parse_scenario(j.dump(), dir));

    auto bad = j;
    bad["crystal"]["length_m"] = 0.02;
    try {
      cli::parse_scenario(bad.dump(), dir);
      FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find("scenario.crystal.length_m") != std::string::npos);
    }

    bad = j;
    bad["scheme"] = {{"adiabatic", nlohmann::json::object()}, {"cd", nlohmann::json::object()}};
    CHECK_THROWS_AS(cli::parse_scenario(bad.dump(), dir), ValidationError);

    bad = j;
    bad["material_file"] = "missing.json";
    CHECK_THROWS_AS(cli::parse_scenario(bad.dump(), dir), ValidationError);

    bad = j;
    bad["crystal"]["length_mm"] = -1.0;
    CHECK_THROWS_WITH_AS(cli::parse_scenario(bad.dump(), dir), doctest::Contains("crystal.length_mm"), ValidationError);

    bad = j;
    bad["sweeps"] = {{{"name", "w"}, {"axis", "signal_wavelength"}, {"range_c", {0, 1}}, {"families", {{{"label", "a"}}}}}};
    CHECK_THROWS_WITH_AS(cli::parse_scenario(bad.dump(), dir), doctest::Contains("range_um"), ValidationError);

    CHECK_THROWS_WITH_AS(cli::parse_scenario("{\n\"setup\": ,\n}", dir), doctest::Contains("line 2"), ValidationError);
  }

  TEST_CASE("material command") {
    cli::MaterialQuery q;
    q.material_file = test::source_dir() / "data" / "ktp_z.json";
    std::ostringstream out, err;
    REQUIRE(cli::cmd_material(q, out, err) == 0);
    const std::string s = out.str();
    CHECK(s.find("delta_k0_per_mm,-4.2267") != std::string::npos);
    // Δn column is zero at the reference temperature
    std::istringstream lines(s);
    std::string line;
    int rows = 0;
    while (std::getline(lines, line)) {
      if (line.rfind("signal", 0) == 0 || line.rfind("pump", 0) == 0 || line.rfind("idler", 0) == 0) {
        CHECK(line.find(",0.0000000000000000e+00,") != std::string::npos);
        ++rows;
      }
    }
    CHECK(rows == 3);

    const fs::path dir = scratch("material");
    std::ofstream(dir / "bad.json") << "{\n  \"name\": \"x\",\n  \"source\": \n}";
    q.material_file = dir / "bad.json";
    std::ostringstream out2, err2;
    CHECK(cli::cmd_material(q, out2, err2) == 2);
    CHECK(err2.str().find("line 4") != std::string::npos);

    q.material_file = test::source_dir() / "data" / "ktp_z.json";
    q.lambda1_um = 9.0;
    std::ostringstream out3, err3;
    CHECK(cli::cmd_material(q, out3, err3) == 3);
  }

  TEST_CASE("design command: warnings, damage threshold and consistency") {
    const fs::path dir = scratch("design");
    cli::CommonOptions o;

    auto j = base_scenario({{"adiabatic", nlohmann::json::object()}}, 20.0, 360.0);
    j["crystal"]["poling_final_um"] = 16.2;
    o.scenario = write_scenario(dir, j);
    auto r = run(cli::cmd_design, o);
    REQUIRE(r.code == 0);
    auto meta = nlohmann::json::parse(slurp(dir / "out" / "design.json"));
    CHECK(meta["warnings"].dump().find("no avoided crossing") != std::string::npos);
    CHECK(slurp(dir / "out" / "profile.csv").rfind("# sfgsta 0.1.0 scenario-digest=fnv1a64:", 0) == 0);

    j = base_scenario({{"cd", nlohmann::json::object()}}, 0.2, 60.0);
    o.scenario = write_scenario(dir, j);
    r = run(cli::cmd_design, o);
    REQUIRE(r.code == 0);
    meta = nlohmann::json::parse(slurp(dir / "out" / "design.json"));
    CHECK(meta["exceeds_damage_threshold"] == true);
    CHECK(meta["q_eff_per_mm"]["max"].get<double>() > 30.0);

    j = base_scenario({{"lz_optimal", {{"coeffs", {-1.47}}, {"solve_for", "none"}}}}, 2.0, 360.0);
    o.scenario = write_scenario(dir, j);
    r = run(cli::cmd_design, o);
    CHECK(r.code == 2);
    CHECK(r.err.find("consistent length") != std::string::npos);
    CHECK(r.err.find("consistent q0") != std::string::npos);
  }

  TEST_CASE("propagate command writes trajectory and summary") {
    const fs::path dir = scratch("propagate");
    cli::CommonOptions o;
    o.scenario = write_scenario(dir, base_scenario({{"lz_optimal", {{"coeffs", {-1.47}}}}}, 2.0, 0.0));
    o.out = dir / "elsewhere";
    const auto r = run(cli::cmd_propagate, o);
    REQUIRE(r.code == 0);
    const auto summary = nlohmann::json::parse(slurp(dir / "elsewhere" / "summary.json"));
    CHECK(summary["efficiency"].get<double>() > 0.999);
    CHECK(summary["min_lr_solution_fidelity"].get<double>() > 1 - 1e-8);
    CHECK(summary["provenance"]["version"] == "0.1.0");
    const std::string csv = slurp(dir / "elsewhere" / "trajectory.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 503);
    for (const auto& e : fs::directory_iterator(dir / "elsewhere")) {
      CHECK(e.path().string().find(".tmp.") == std::string::npos);
    }
  }

  TEST_CASE("sweep command output does not depend on the worker count") {
    const fs::path dir = scratch("sweep");
    auto j = base_scenario({{"adiabatic", nlohmann::json::object()}}, 2.0, 60.0);
    j["sweeps"] = {{{"name", "w"},
                    {"axis", "signal_wavelength"},
                    {"range_um", {1.52, 1.55}},
                    {"points", 5},
                    {"families", {{{"label", "I60"}}, {{"label", "I360"}, {"pump_intensity_mw_cm2", 360.0}}}}}};
    cli::CommonOptions o;
    o.scenario = write_scenario(dir, j);
    o.workers = 1;
    REQUIRE(run(cli::cmd_sweep, o).code == 0);
    const std::string one = slurp(dir / "out" / "w.csv");
    const std::string one_json = slurp(dir / "out" / "w.json");
    o.workers = 4;
    REQUIRE(run(cli::cmd_sweep, o).code == 0);
    CHECK(slurp(dir / "out" / "w.csv") == one);
    CHECK(slurp(dir / "out" / "w.json") == one_json);
    CHECK(one.find("lambda1_um,I60,I360\n") != std::string::npos);

    j.erase("sweeps");
    o.scenario = write_scenario(dir, j);
    CHECK(run(cli::cmd_sweep, o).code == 2);
  }

  TEST_CASE("exit codes") {
    CHECK(cli::exit_code_for(ValidationError("x")) == 2);
    CHECK(cli::exit_code_for(ContractError("x")) == 2);
    CHECK(cli::exit_code_for(DomainError("x")) == 3);
    CHECK(cli::exit_code_for(DesignError("x")) == 3);
    CHECK(cli::exit_code_for(SingularityError("x")) == 3);
    CHECK(cli::exit_code_for(IntegrationError("x", 1.0)) == 4);
  }

  TEST_CASE("executable") {
    const std::string exe = SFGSTA_CLI_PATH;
    CHECK(shell(exe + " --version") == 0);
    CHECK(shell(exe + " design") == 2);
    CHECK(shell(exe + " design --scenario /nonexistent.json") == 2);
    CHECK(shell(exe + " material --material " + (test::source_dir() / "data" / "ktp_z.json").string()) == 0);
  }
}
