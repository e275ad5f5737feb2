#include "nsbem/commands.hpp"
#include "nsbem/config.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using namespace nsbem;

namespace {

const char* kCorner = R"(; corner test
[run]
command = solve-corner

[geometry]
beta = 45   ; inline comment
nodes_per_edge = 21

[boundary-conditions]
case = I
)";

std::string error_of(const RunConfig& c) {
    try {
        validate(c);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

int cli(const std::string& args) {
    const std::string cmd = std::string("\"") + NSBEM_CLI_PATH + "\" --quiet " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
#ifdef WEXITSTATUS
    return WEXITSTATUS(status);
#else
    return status;
#endif
}

std::filesystem::path scratch(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "nsbem_config_tests";
    std::filesystem::create_directories(dir);
    return dir / name;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

}  // namespace

TEST_CASE("parsing: sections, types, inline comments") {
    const RunConfig c = RunConfig::parse(kCorner, "corner.ini");
    CHECK(c.require_string("run.command") == "solve-corner");
    CHECK(c.get_double("geometry.beta", 0.0) == 45.0);
    CHECK(c.get_int("geometry.nodes_per_edge", 0) == 21);
    CHECK(c.get_double("geometry.missing", 2.5) == 2.5);
    CHECK(validate(c) == "solve-corner");

    const RunConfig t = RunConfig::parse("[a]\nflag = yes\nlist = 1, 2 3\nx = inf\nv = 0.5,1e-3\n");
    CHECK(t.get_bool("a.flag", false));
    CHECK(t.get_int_list("a.list") == std::vector<int>{1, 2, 3});
    CHECK(std::isinf(t.get_double("a.x", 0.0)));
    CHECK(t.get_double_list("a.v") == std::vector<double>{0.5, 1e-3});
}

TEST_CASE("errors name the source, line and key") {
    const RunConfig c = RunConfig::parse("[run]\ncommand = solve-corner\n\n[geometry]\nbeta = forty\n", "f.ini");
    try {
        c.get_double("geometry.beta", 0.0);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).rfind("f.ini:5: geometry.beta:", 0) == 0);
    }
    CHECK_THROWS_AS(RunConfig::parse("[run\ncommand = x\n"), ConfigError);
    CHECK_THROWS_AS(RunConfig::parse("loose = 1\n"), ConfigError);
    CHECK_THROWS_AS(RunConfig::parse("[a]\nb = maybe\n").get_bool("a.b", false), ConfigError);
    CHECK_THROWS_AS(RunConfig::parse("[a]\nb = 1.5\n").get_int("a.b", 0), ConfigError);
    CHECK_THROWS_AS(RunConfig::load("/nonexistent/nsbem.ini"), ConfigError);
}

TEST_CASE("unknown keys and bad values are rejected before any computation") {
    RunConfig typo = RunConfig::parse(std::string(kCorner) + "\n[solver]\nplanar_phi_ordr = 3\n", "typo.ini");
    const std::string msg = error_of(typo);
    CHECK(msg.find("solver.planar_phi_ordr") != std::string::npos);
    CHECK(msg.find("typo.ini:13") != std::string::npos);

    RunConfig c = RunConfig::parse(kCorner);
    c.set("geometry.beta", "190");
    CHECK_FALSE(error_of(c).empty());
    c = RunConfig::parse(kCorner);
    c.set("run.command", "frobnicate");
    CHECK(error_of(c).find("unknown command") != std::string::npos);
    c = RunConfig::parse(kCorner);
    c.set("quadrature.triangle_points", "4");
    CHECK_FALSE(error_of(c).empty());
    CHECK_THROWS_AS(c.set("nosection", "1"), ConfigError);

    RunConfig w = load_preset("desk");
    w.set("simulation.H", "0.5");
    CHECK(error_of(w).find("[simulation]") != std::string::npos);
}

TEST_CASE("hash depends on content only") {
    const RunConfig a = RunConfig::parse(kCorner);
    const RunConfig b = RunConfig::parse(
        "[boundary-conditions]\ncase=I\n# another comment\n[geometry]\nnodes_per_edge = 21\nbeta = 45\n"
        "[run]\ncommand = solve-corner\n");
    CHECK(a.canonical() == b.canonical());
    CHECK(a.hash() == b.hash());
    CHECK(a.hash().size() == 16);
    RunConfig c = a;
    c.set("geometry.nodes_per_edge", "41");
    CHECK(c.hash() != a.hash());
    CHECK(fnv1a("") == 0xcbf29ce484222325ull);
    CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cull);
}

TEST_CASE("every shipped preset validates") {
    const auto names = preset_names();
    CHECK(names.size() >= 10);
    for (const auto& name : names) {
        CAPTURE(name);
        const RunConfig c = load_preset(name);
        CHECK_NOTHROW(validate(c));
    }
    for (const char* needed : {"desk", "full-resolution", "deep-pair", "single-sphere", "translating-sphere",
                               "osculating-spheres", "corner-b45-caseI", "corner-b90-caseI-log"})
        CHECK(std::find(names.begin(), names.end(), needed) != names.end());
    CHECK_THROWS_AS(load_preset("no-such-preset"), ConfigError);
}

TEST_CASE("desk preset: 1500 steps over 30 R, snapshots at 13.2 and 30") {
    const WavesimSpec w = wavesim_spec(load_preset("desk"));
    CHECK(w.sim.steps() == 1500);
    CHECK(w.sim.froude_number() == doctest::Approx(1.0));
    CHECK(w.snapshot_steps == std::vector<int>{660, 1500});
    CHECK(660 * w.sim.U0 * w.sim.dt == doctest::Approx(13.2));
    const WavesimSpec full = wavesim_spec(load_preset("full-resolution"));
    CHECK(full.sim.steps() >= 1500);
}

TEST_CASE("command output starts with the metadata preamble") {
    const auto dir = scratch("corner-out");
    std::filesystem::remove_all(dir);
    CommandContext ctx;
    ctx.out_dir = dir;
    const RunConfig c = RunConfig::parse(kCorner, "corner.ini");
    const CornerReport r = cmd_solve_corner(c, ctx);
    CHECK(r.max_error_percent < 1.0);
    std::string csv;
    for (const auto& e : std::filesystem::directory_iterator(dir))
        if (e.path().extension() == ".csv") csv = e.path().string();
    REQUIRE_FALSE(csv.empty());
    std::ifstream in(csv);
    std::string l1, l2;
    std::getline(in, l1);
    std::getline(in, l2);
    CHECK(l1 == "# nsbem solve-corner");
    CHECK(l2 == "# config_hash = " + c.hash());
    CHECK(std::filesystem::exists(dir / "config.ini"));

    std::ostringstream pre;
    write_csv_preamble(pre, "x", c, {{"k", "v"}});
    CHECK(pre.str() == "# nsbem x\n# config_hash = " + c.hash() + "\n# config_source = corner.ini\n# k = v\n");
    std::filesystem::remove_all(dir);
}

TEST_CASE("command-line exit codes") {
    const auto out = scratch("cli-out").string();
    CHECK(cli("--list-presets") == 0);
    CHECK(cli("--preset desk --check") == 0);
    CHECK(cli("--preset corner-b45-caseI --out \"" + out + "\"") == 0);
    CHECK(std::filesystem::exists(std::filesystem::path(out) / "config.ini"));
    CHECK(cli("--preset no-such-preset") == 2);
    CHECK(cli("") == 2);
    CHECK(cli("--bogus-flag") == 2);

    const auto bad = scratch("bad.ini");
    write_file(bad, std::string(kCorner) + "typo_key = 1\n");
    CHECK(cli("--config \"" + bad.string() + "\" --check") == 2);

    // valid configuration whose solve breaks down: an exterior point this far
    // away overflows the field coefficients
    const auto broken = scratch("broken.ini");
    write_file(broken, "[run]\ncommand = solve-axisym\n[geometry]\nnodes = 41\n[boundary-conditions]\n"
                       "problem = constant-dirichlet\n[desingularization]\nfield = inverse-point\n"
                       "exterior_point = 0, 0, 1e200\n");
    CHECK(cli("--config \"" + broken.string() + "\" --out \"" + out + "\"") == 3);
    std::filesystem::remove_all(scratch(""));
}
