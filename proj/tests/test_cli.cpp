#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"

#include "fekete/cli.hpp"

using namespace fekete;
using namespace fekete::cli;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "fekete_cli_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

bool has_diag(const std::vector<Diagnostic>& diags, const std::string& field) {
    for (const auto& d : diags)
        if (d.field == field) return true;
    return false;
}

int run_quiet(const ScenarioConfig& config) {
    std::ostringstream sink;
    return run(config, sink);
}

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("validate: missing and malformed parameters produce field diagnostics") {
    ScenarioConfig config;
    config.command = "equilibrium";
    config.parameters = {{"n", "4"}};
    auto diags = validate(config);
    CHECK(has_diag(diags, "radius"));

    config.parameters = {{"n", "four"}, {"radius", "1"}};
    diags = validate(config);
    CHECK(has_diag(diags, "n"));

    config.parameters = {{"n", "4"}, {"radius", "1"}, {"bogus", "1"}};
    diags = validate(config);
    CHECK(has_diag(diags, "bogus"));

    config.command = "no-such-command";
    diags = validate(config);
    CHECK(has_diag(diags, "command"));
}

TEST_CASE("validate: two-ball disjointness and a fully valid config") {
    ScenarioConfig config;
    config.command = "two-balls";
    config.parameters = {{"R", "1"}, {"Q", "1"}, {"r", "1"}, {"q", "1"}, {"gap", "-0.5"}};
    CHECK(has_diag(validate(config), "gap"));

    config.parameters["gap"] = "1";
    CHECK(validate(config).empty());
}

TEST_CASE("validate: oscillation needs a complete gap range") {
    ScenarioConfig config;
    config.command = "oscillation";
    config.parameters = {{"R", "1"}, {"q", "1"}, {"d-min", "0.5"}};
    CHECK(has_diag(validate(config), "d-max"));
    config.parameters["d-max"] = "0.1";
    CHECK(has_diag(validate(config), "d-max"));
    config.parameters["d-max"] = "2";
    CHECK(validate(config).empty());
}

TEST_CASE("equilibrium run writes the tetrahedron artifacts") {
    const auto dir = fresh_dir("equilibrium");
    ScenarioConfig config;
    config.command = "equilibrium";
    config.output_dir = dir.string();
    config.seed = 7;
    config.parameters = {{"domain", "sphere"}, {"radius", "1"}, {"n", "4"}, {"q", "1"}};
    CHECK(run_quiet(config) == exit_ok);

    const auto points = pointcharge::config_from_csv_string(slurp(dir / "points.csv"));
    CHECK(points.size() == 4);

    const auto manifest = json::parse(slurp(dir / "run.json"));
    CHECK(manifest["command"] == "equilibrium");
    CHECK(manifest["status"] == "ok");
    CHECK(manifest["result"]["converged"] == true);
    CHECK(manifest["result"]["energy"].get<double>() ==
          doctest::Approx(3.6742346).epsilon(1e-7));
    CHECK(manifest["result"]["boundary_max_distance"].get<double>() <= 1e-6);
    CHECK(manifest["library_version"] == library_version);
}

TEST_CASE("shells run reproduces the alternating charges") {
    const auto dir = fresh_dir("shells");
    ScenarioConfig config;
    config.command = "shells";
    config.output_dir = dir.string();
    config.parameters = {{"radii", "0.2,0.4,0.6"}, {"q1", "1"}};
    CHECK(run_quiet(config) == exit_ok);

    const auto manifest = json::parse(slurp(dir / "run.json"));
    const auto charges = manifest["result"]["charges"].get<std::vector<double>>();
    REQUIRE(charges.size() == 3);
    CHECK(charges[0] == doctest::Approx(1.0));
    CHECK(charges[1] == doctest::Approx(-1.0));
    CHECK(charges[2] == doctest::Approx(1.0));

    const auto csv = slurp(dir / "points.csv");
    CHECK(csv.rfind("r,q\n", 0) == 0);
}

TEST_CASE("trajectory run with a single sample") {
    const auto dir = fresh_dir("trajectory");
    ScenarioConfig config;
    config.command = "trajectory";
    config.output_dir = dir.string();
    config.parameters = {{"m", "1"}, {"v", "1"}, {"e", "1"}, {"H", "1"}, {"t", "0"}};
    CHECK(run_quiet(config) == exit_ok);
    CHECK(slurp(dir / "curve.csv") == "t,x,y,z\n0,0,0,0\n");
}

TEST_CASE("flux run recovers a unit charge from its CSV") {
    const auto dir = fresh_dir("flux");
    write_text_file((dir / "charges.csv").string(), "x,y,z,q\n0,0,0,1\n");
    ScenarioConfig config;
    config.command = "flux";
    config.output_dir = dir.string();
    config.parameters = {{"points", (dir / "charges.csv").string()}, {"radius", "1"}};
    CHECK(run_quiet(config) == exit_ok);
    const auto manifest = json::parse(slurp(dir / "run.json"));
    CHECK(manifest["result"]["enclosed_charge"].get<double>() ==
          doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("two-ball image charges feed straight into the flux command") {
    const auto dir = fresh_dir("pipeline");
    ScenarioConfig solve;
    solve.command = "two-balls";
    solve.output_dir = dir.string();
    solve.parameters = {{"R", "1"}, {"Q", "2"}, {"r", "1"}, {"q", "1"}, {"gap", "1"}};
    REQUIRE(run_quiet(solve) == exit_ok);

    ScenarioConfig flux;
    flux.command = "flux";
    flux.output_dir = (dir / "flux").string();
    flux.parameters = {{"points", (dir / "points.csv").string()},
                       {"center", "0,0,0"},
                       {"radius", "1.5"},
                       {"n-quad", "2048"}};
    REQUIRE(run_quiet(flux) == exit_ok);
    const auto manifest = json::parse(slurp(dir / "flux" / "run.json"));
    CHECK(manifest["result"]["enclosed_charge"].get<double>() ==
          doctest::Approx(2.0).epsilon(1e-3));
}

TEST_CASE("cavendish run reports the bound and the measured field") {
    const auto dir = fresh_dir("cavendish");
    ScenarioConfig config;
    config.command = "cavendish";
    config.output_dir = dir.string();
    config.seed = 3;
    config.parameters = {{"Q", "100"}, {"d", "2"}, {"q", "1"}, {"R", "1"}, {"n", "20"}};
    CHECK(run_quiet(config) == exit_ok);
    const auto manifest = json::parse(slurp(dir / "run.json"));
    CHECK(manifest["result"]["bound"].get<double>() == doctest::Approx(24.0));
    CHECK(manifest["result"]["measured_gradient_norm"].get<double>() >= 24.0);
}

TEST_CASE("levelset run enforces the bbox margin rule") {
    const auto dir = fresh_dir("levelset");
    write_text_file((dir / "charges.csv").string(), "x,y,z,q\n0,0,0,1\n0.5,0,0,1\n");
    ScenarioConfig config;
    config.command = "levelset";
    config.output_dir = dir.string();
    config.parameters = {{"points", (dir / "charges.csv").string()},
                         {"threshold", "1.5"},
                         {"bbox", "-0.4,-0.6,-0.6,1.1,0.6,0.6"},
                         {"res", "16"}};
    CHECK(has_diag(validate(config), "bbox"));

    config.parameters["bbox"] = "-2,-2,-2,2.5,2,2";
    CHECK(validate(config).empty());
    CHECK(run_quiet(config) == exit_ok);
    CHECK(fs::file_size(dir / "grid.bin") == 16u * 16 * 16 * 8);
    CHECK(fs::file_size(dir / "labels.bin") == 16u * 16 * 16 * 4);
    const auto manifest = json::parse(slurp(dir / "run.json"));
    CHECK(manifest["result"]["components"].is_array());
}

TEST_CASE("series failure surfaces as the numerical exit code") {
    const auto dir = fresh_dir("twoball_fail");
    ScenarioConfig config;
    config.command = "two-balls";
    config.output_dir = dir.string();
    config.parameters = {{"R", "1"}, {"Q", "1"}, {"r", "1"},
                         {"q", "1"}, {"gap", "1e-4"}, {"n-max", "3"}};
    CHECK(run_quiet(config) == exit_numerical);
    const auto manifest = json::parse(slurp(dir / "run.json"));
    CHECK(manifest["status"] == "numerical-failure");
}

TEST_CASE("identical configs reproduce byte-identical artifacts") {
    ScenarioConfig config;
    config.command = "equilibrium";
    config.seed = 11;
    config.parameters = {{"domain", "ball"}, {"radius", "1"}, {"n", "6"}, {"q", "1"}};

    const auto a = fresh_dir("repeat_a");
    const auto b = fresh_dir("repeat_b");
    config.output_dir = a.string();
    REQUIRE(run_quiet(config) == exit_ok);
    config.output_dir = b.string();
    REQUIRE(run_quiet(config) == exit_ok);

    CHECK(slurp(a / "points.csv") == slurp(b / "points.csv"));
    auto ja = json::parse(slurp(a / "run.json"));
    auto jb = json::parse(slurp(b / "run.json"));
    ja.erase("wall_time_seconds");
    jb.erase("wall_time_seconds");
    CHECK(ja.dump() == jb.dump());
}

TEST_CASE("the binary parses flags, merges config files and sets exit codes") {
    const auto dir = fresh_dir("binary");
    const std::string binary = FEKETE_CLI_BINARY;

    // spec'd scenario: 4 unit charges relax to the tetrahedron
    std::string cmd = binary + " equilibrium --domain sphere --radius 1 --n 4 --q 1 --seed 7" +
                      " --out " + (dir / "a").string() + " 2>/dev/null";
    REQUIRE(std::system(cmd.c_str()) == 0);
    auto manifest = json::parse(slurp(dir / "a" / "run.json"));
    CHECK(manifest["result"]["energy"].get<double>() ==
          doctest::Approx(3.6742346).epsilon(1e-7));

    // config file + flag override: the file asks for n=2, the flag wins
    write_text_file((dir / "scenario.json").string(),
                    "{\"command\": \"equilibrium\", \"seed\": 7, \"parameters\": "
                    "{\"domain\": \"sphere\", \"radius\": 1, \"n\": 2, \"q\": 1}}\n");
    cmd = binary + " equilibrium --config " + (dir / "scenario.json").string() + " --n 3 --out " +
          (dir / "b").string() + " 2>/dev/null";
    REQUIRE(std::system(cmd.c_str()) == 0);
    manifest = json::parse(slurp(dir / "b" / "run.json"));
    CHECK(manifest["parameters"]["n"] == "3");
    CHECK(manifest["result"]["energy"].get<double>() ==
          doctest::Approx(std::sqrt(3.0)).epsilon(1e-9));

    // missing required flag: validation exit code
    cmd = binary + " equilibrium --n 4 --out " + (dir / "c").string() + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(status));
    CHECK(WEXITSTATUS(status) == exit_validation);
}

TEST_SUITE_END();
