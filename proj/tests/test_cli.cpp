#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "msweep_cli_test" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// Exit status of the CLI; stdout goes to out_file when given.
int cli(const std::string& args, const fs::path& out_file = {}) {
    std::string cmd = std::string("\"") + MSWEEP_CLI + "\" " + args;
    cmd += out_file.empty() ? " > /dev/null 2>&1" : " > \"" + out_file.string() + "\" 2> /dev/null";
    const int raw = std::system(cmd.c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

json manifest(const fs::path& dir) { return json::parse(slurp(dir / "manifest.json")); }

}  // namespace

TEST_CASE("run writes trajectory, diagnostics and manifest") {
    const fs::path out = scratch("braess");
    REQUIRE(cli("run --scenario braess_moving --seed 7 --out \"" + out.string() + "\"") == 0);
    CHECK(fs::exists(out / "trajectory.csv"));
    CHECK(fs::exists(out / "diagnostics.csv"));
    const json m = manifest(out);
    CHECK(m["status"] == "ok");
    CHECK(m["command"] == "run");
    CHECK(m["effective"]["seed"] == 7);
    CHECK(m["effective"]["validation"] == "advisory");
    CHECK(m.contains("mass_in_region_at_T"));
    CHECK(m["artifacts"].size() >= 2);
    CHECK(m["phases_s"].contains("run"));
}

TEST_CASE("check all with a companion passes on the half-plane sweep") {
    const fs::path out = scratch("check");
    REQUIRE(cli("check --scenario halfspace_sweep --check all --compare halfspace_sweep --out \"" + out.string() +
                "\"") == 0);
    std::istringstream rows(slurp(out / "diagnostics.csv"));
    std::string line;
    std::getline(rows, line);
    CHECK(line == "t,invariant,value,bound,pass");
    std::size_t n = 0;
    bool saw_cone = false, saw_stability = false;
    while (std::getline(rows, line)) {
        ++n;
        CHECK(line.ends_with(",true"));
        saw_cone |= line.find(",cone,") != std::string::npos;
        saw_stability |= line.find(",stability,") != std::string::npos;
    }
    CHECK(n > 100);
    CHECK(saw_cone);
    CHECK(saw_stability);
    CHECK(manifest(out)["status"] == "ok");
}

TEST_CASE("frames are written on request") {
    const fs::path out = scratch("frames");
    REQUIRE(cli("run --scenario rotating_ellipse --frames-every 100 --out \"" + out.string() + "\"") == 0);
    std::size_t frames = 0;
    for (const auto& e : fs::directory_iterator(out / "frames")) frames += e.path().extension() == ".svg";
    CHECK(frames == 5);
}

TEST_CASE("exit codes") {
    const fs::path out = scratch("codes");
    CHECK(cli("run") == 2);
    CHECK(cli("run --scenario no_such_preset --out \"" + out.string() + "\"") == 2);
    CHECK(cli("run --scenario attraction_repulsion --tau 10 --out \"" + out.string() + "\"") == 2);
    CHECK(manifest(out)["status"] == "invalid");
    CHECK(cli("check --scenario halfspace_sweep --check stability --out \"" + out.string() + "\"") == 2);

    const fs::path scn = out / "abort.scn";
    std::ofstream(scn) << "[field]\nkind = drift\nL = 10\ndrift = constant -10 0\n\n"
                          "[obstacle]\nshape = ball-complement\ncenter = 0 0\nradius = 1\n\n"
                          "[initial]\nkind = points\npoints = 3 0; 2 0\n\n"
                          "[run]\ntau = 0.1\nhorizon = 1\nintegrator = euler\nworkspace = -8 -8 8 8\n"
                          "reach = 0.3\nvalidation = advisory\n";
    const fs::path abort_out = out / "abort";
    CHECK(cli("run --scenario \"" + scn.string() + "\" --out \"" + abort_out.string() + "\"") == 3);
    CHECK(fs::exists(abort_out / "trajectory_partial.csv"));
    const json m = manifest(abort_out);
    CHECK(m["status"] == "aborted");
    CHECK(m["error"].get<std::string>().find("particle 1") != std::string::npos);
}

TEST_CASE("w2 between two cloud files") {
    const fs::path out = scratch("w2");
    std::ofstream(out / "a.csv") << "x1,x2\n0,0\n1,0\n";
    std::ofstream(out / "b.csv") << "x1,x2\n1,0\n0,3\n";
    std::ofstream(out / "c.csv") << "x1,x2\n0,0\n";
    REQUIRE(cli("w2 \"" + (out / "a.csv").string() + "\" \"" + (out / "b.csv").string() + "\"", out / "d.txt") == 0);
    CHECK(std::stod(slurp(out / "d.txt")) == doctest::Approx(std::sqrt(4.5)).epsilon(1e-15));
    CHECK(cli("w2 \"" + (out / "a.csv").string() + "\" \"" + (out / "c.csv").string() + "\"") == 3);
}

TEST_CASE("optimize writes a results table") {
    const fs::path out = scratch("optimize");
    std::ofstream(out / "grid.txt") << "# cx cy a1 a2 omega\n-1 0 0.5 0.3 0\n2 0 0.5 0.5 0\n";
    REQUIRE(cli("optimize --scenario rotating_ellipse --grid \"" + (out / "grid.txt").string() + "\" --out \"" +
                out.string() + "\"") == 0);
    std::istringstream table(slurp(out / "results.csv"));
    std::string line;
    std::size_t n = 0;
    std::getline(table, line);
    CHECK(line.starts_with("cx,cy,a1,a2,omega,admissible,objective"));
    while (std::getline(table, line)) ++n;
    CHECK(n == 2);
    CHECK(cli("optimize --grid \"" + (out / "missing.txt").string() + "\"") == 2);
}

TEST_CASE("identical invocations give identical trajectories") {
    const fs::path a = scratch("det_a");
    const fs::path b = scratch("det_b");
    const std::string flags = "run --scenario congestion --seed 3 --tau 0.02 --out ";
    REQUIRE(cli(flags + "\"" + a.string() + "\"") == 0);
    REQUIRE(cli(flags + "\"" + b.string() + "\"") == 0);
    const std::string ta = slurp(a / "trajectory.csv");
    CHECK(ta.size() > 1000);
    CHECK(ta == slurp(b / "trajectory.csv"));
    CHECK(manifest(a)["effective"] == manifest(b)["effective"]);
}
