// msweep command-line front end. Talks to the library only through the C API.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "msweep/msweep.h"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr int kExitInvariant = 1;
constexpr int kExitUsage = 2;
constexpr int kExitRun = 3;

struct Failure {
    msw_status status;
    std::string message;
};

void check(msw_status st) {
    if (st != MSW_OK) throw Failure{st, msw_last_error()};
}

/// Owning wrappers for the C handles.
template <class T, void (*Free)(T*)>
struct Handle {
    T* p = nullptr;
    Handle() = default;
    Handle(const Handle&) = delete;
    Handle& operator=(const Handle&) = delete;
    ~Handle() {
        if (p) Free(p);
    }
};
using Scenario = Handle<msw_scenario, msw_scenario_free>;
using Trajectory = Handle<msw_trajectory, msw_trajectory_free>;
using Diagnostics = Handle<msw_diagnostics, msw_diagnostics_free>;

struct RunFlags {
    std::string scenario;
    std::string out = "out";
    std::optional<double> tau;
    std::optional<std::size_t> particles;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> substeps;
    std::optional<std::string> integrator;
    std::size_t frames_every = 0;
    std::vector<std::string> checks{"support", "speed"};
    std::string compare;
};

class Stopwatch {
public:
    double lap() {
        const auto now = std::chrono::steady_clock::now();
        const double s = std::chrono::duration<double>(now - last_).count();
        last_ = now;
        return s;
    }

private:
    std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

std::string take_string(char* s) {
    std::string out(s);
    msw_string_free(s);
    return out;
}

/// A path to a scenario file, or else a preset name. Overrides are applied
/// before validation.
void load(const std::string& spec, const RunFlags& f, Scenario& s) {
    if (fs::is_regular_file(spec)) {
        std::ifstream in(spec, std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        check(msw_scenario_parse(buf.str().c_str(), &s.p));
    } else {
        check(msw_scenario_preset(spec.c_str(), &s.p));
    }
    if (f.tau) check(msw_scenario_set_tau(s.p, *f.tau));
    if (f.particles) check(msw_scenario_set_particles(s.p, *f.particles));
    if (f.seed) check(msw_scenario_set_seed(s.p, *f.seed));
    if (f.substeps) check(msw_scenario_set_substeps(s.p, *f.substeps));
    if (f.integrator) check(msw_scenario_set_integrator(s.p, *f.integrator == "euler" ? MSW_EULER : MSW_RK4));
    check(msw_scenario_validate(s.p));
}

unsigned check_mask(const std::vector<std::string>& names, bool have_companion) {
    unsigned mask = 0;
    for (const auto& n : names) {
        if (n == "support") mask |= MSW_CHECK_SUPPORT;
        else if (n == "speed") mask |= MSW_CHECK_SPEED;
        else if (n == "cone") mask |= MSW_CHECK_CONE;
        else if (n == "noflux") mask |= MSW_CHECK_NOFLUX;
        else if (n == "stability") mask |= MSW_CHECK_STABILITY;
        else if (n == "all") mask |= have_companion ? MSW_CHECK_ALL : (MSW_CHECK_ALL & ~MSW_CHECK_STABILITY);
    }
    if ((mask & MSW_CHECK_STABILITY) && !have_companion)
        throw Failure{MSW_INVALID_ARGUMENT, "--check stability needs --compare"};
    return mask;
}

json flags_json(const RunFlags& f) {
    json j;
    j["tau"] = f.tau ? json(*f.tau) : json(nullptr);
    j["particles"] = f.particles ? json(*f.particles) : json(nullptr);
    j["seed"] = f.seed ? json(*f.seed) : json(nullptr);
    j["substeps"] = f.substeps ? json(*f.substeps) : json(nullptr);
    j["integrator"] = f.integrator ? json(*f.integrator) : json(nullptr);
    j["frames_every"] = f.frames_every;
    j["check"] = f.checks;
    j["compare"] = f.compare.empty() ? json(nullptr) : json(f.compare);
    return j;
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    out << j.dump(2) << "\n";
}

/// Shared by `run` and `check`. Returns the exit code.
int execute(const RunFlags& f, bool artifacts, const std::string& command) {
    Stopwatch clock;
    json manifest;
    manifest["tool"] = "msweep";
    manifest["version"] = msw_version();
    manifest["command"] = command;
    manifest["scenario_path"] = f.scenario;
    manifest["output_dir"] = f.out;
    manifest["flags"] = flags_json(f);
    manifest["status"] = "running";
    json phases;

    const fs::path out_dir(f.out);
    fs::create_directories(out_dir);
    const fs::path manifest_path = out_dir / "manifest.json";

    auto finish = [&](const std::string& status, const std::string& error) {
        manifest["status"] = status;
        if (!error.empty()) manifest["error"] = error;
        manifest["phases_s"] = phases;
        write_json(manifest_path, manifest);
    };

    Scenario s;
    Scenario companion_s;
    unsigned mask = 0;
    try {
        mask = check_mask(f.checks, !f.compare.empty());
        load(f.scenario, f, s);
        if (!f.compare.empty()) load(f.compare, f, companion_s);
    } catch (const Failure& e) {
        phases["load"] = clock.lap();
        finish("invalid", e.message);
        std::cerr << "error: " << msw_status_name(e.status) << ": " << e.message << "\n";
        return kExitUsage;
    }
    phases["load"] = clock.lap();
    msw_scenario_info info{};
    check(msw_scenario_info_get(s.p, &info));
    manifest["scenario"] = take_string([&] {
        char* text = nullptr;
        check(msw_scenario_to_string(s.p, &text));
        return text;
    }());
    manifest["effective"] = {{"tau", info.tau},
                             {"horizon", info.horizon},
                             {"particles", info.particles},
                             {"seed", info.seed},
                             {"substeps", info.substeps},
                             {"integrator", info.integrator == MSW_EULER ? "euler" : "rk4"},
                             {"L", info.L},
                             {"M", info.M},
                             {"reach", std::isinf(info.reach) ? json("inf") : json(info.reach)},
                             {"validation", info.strict ? "strict" : "advisory"}};
    write_json(manifest_path, manifest);

    Trajectory t;
    const msw_status run_status = msw_run(s.p, &t.p);
    phases["run"] = clock.lap();
    json artifacts_list = json::array();
    if (run_status != MSW_OK) {
        const std::string msg = msw_last_error();
        if (t.p) {
            const fs::path partial = out_dir / "trajectory_partial.csv";
            if (msw_trajectory_write_csv(t.p, partial.string().c_str()) == MSW_OK)
                artifacts_list.push_back(partial.filename().string());
        }
        manifest["artifacts"] = artifacts_list;
        finish("aborted", msg);
        std::cerr << "error: run aborted (" << msw_status_name(run_status) << "): " << msg << "\n";
        return kExitRun;
    }
    Trajectory companion;
    if (companion_s.p) check(msw_run(companion_s.p, &companion.p));
    phases["companion_run"] = clock.lap();

    manifest["effective"]["L_effective"] = msw_trajectory_effective_l(t.p);
    double mass = 0.0;
    check(msw_trajectory_mass_in_region(t.p, msw_trajectory_mesh_size(t.p) - 1, &mass));
    manifest["mass_in_region_at_T"] = mass;

    Diagnostics d;
    check(msw_check(t.p, companion.p, mask, &d.p));
    phases["diagnostics"] = clock.lap();

    if (artifacts) {
        check(msw_trajectory_write_csv(t.p, (out_dir / "trajectory.csv").string().c_str()));
        artifacts_list.push_back("trajectory.csv");
    }
    check(msw_diagnostics_write_csv(d.p, (out_dir / "diagnostics.csv").string().c_str()));
    artifacts_list.push_back("diagnostics.csv");
    if (artifacts && f.frames_every > 0) {
        std::size_t written = 0;
        check(msw_render_frames(t.p, (out_dir / "frames").string().c_str(), f.frames_every, &written));
        artifacts_list.push_back("frames/");
        manifest["frames_written"] = written;
    }
    phases["write"] = clock.lap();
    manifest["artifacts"] = artifacts_list;

    // Per-invariant summary.
    const std::size_t rows = msw_diagnostics_count(d.p);
    std::map<std::string, std::pair<std::size_t, std::size_t>> tally;  // name -> (rows, failures)
    for (std::size_t i = 0; i < rows; ++i) {
        msw_diag_row r{};
        check(msw_diagnostics_row(d.p, i, &r));
        auto& e = tally[r.invariant];
        ++e.first;
        if (!r.pass) ++e.second;
    }
    json summary;
    for (const auto& [name, c] : tally) summary[name] = {{"rows", c.first}, {"failed", c.second}};
    manifest["diagnostics"] = summary;

    const std::size_t first = msw_diagnostics_first_failure(d.p);
    if (first < rows) {
        msw_diag_row r{};
        check(msw_diagnostics_row(d.p, first, &r));
        std::ostringstream os;
        os.precision(17);
        os << r.invariant << " at t = " << r.t << ": value " << r.value << " exceeds bound " << r.bound;
        manifest["first_failure"] = os.str();
        finish("invariant-failed", "");
        std::cerr << "invariant failed: " << os.str() << "\n";
        return kExitInvariant;
    }
    finish("ok", "");
    if (command == "check")
        for (const auto& [name, c] : tally) std::cout << name << ": " << c.first << " rows, all pass\n";
    std::cout << "mass in region at T: " << mass << "\n";
    return 0;
}

void add_run_flags(CLI::App* cmd, RunFlags& f, bool frames) {
    cmd->add_option("--scenario", f.scenario, "Scenario file or preset name")->required();
    cmd->add_option("--out", f.out, "Output directory");
    cmd->add_option("--tau", f.tau, "Override the step tau")->check(CLI::PositiveNumber);
    cmd->add_option("--particles", f.particles, "Override the particle count")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", f.seed, "Override the sampling seed");
    cmd->add_option("--substeps", f.substeps, "Integrator substeps per interval")->check(CLI::PositiveNumber);
    cmd->add_option("--integrator", f.integrator, "Transport integrator")->check(CLI::IsMember({"euler", "rk4"}));
    if (frames) cmd->add_option("--frames-every", f.frames_every, "Write an SVG frame every k mesh steps");
    cmd->add_option("--check", f.checks, "Invariants to evaluate")
        ->delimiter(',')
        ->check(CLI::IsMember({"support", "speed", "cone", "noflux", "stability", "all"}));
    cmd->add_option("--compare", f.compare, "Companion scenario for the stability estimate");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Measure sweeping processes: catching-up scheme, diagnostics and crowd experiments"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(msw_version()));

    RunFlags run_flags;
    auto* run = app.add_subcommand("run", "Run a scenario and write trajectory, diagnostics and manifest");
    add_run_flags(run, run_flags, true);

    RunFlags check_flags;
    check_flags.checks = {"all"};
    auto* chk = app.add_subcommand("check", "Run a scenario and evaluate invariants only");
    add_run_flags(chk, check_flags, false);

    std::uint64_t braess_seed = 1;
    std::size_t braess_seeds = 1;
    std::string braess_integrator = "rk4";
    std::string braess_out;
    auto* braess = app.add_subcommand("braess", "Mass left in the dangerous region for the three exit setups");
    braess->add_option("--seed", braess_seed, "First seed");
    braess->add_option("--seeds", braess_seeds, "Number of consecutive seeds")->check(CLI::PositiveNumber);
    braess->add_option("--integrator", braess_integrator)->check(CLI::IsMember({"euler", "rk4"}));
    braess->add_option("--out", braess_out, "Directory for braess.csv");

    std::string opt_scenario = "braess_stationary";
    std::string opt_grid;
    std::string opt_out = "out";
    std::optional<std::uint64_t> opt_seed;
    auto* optimize = app.add_subcommand("optimize", "Grid search over the elliptic obstacle");
    optimize->add_option("--scenario", opt_scenario, "Base scenario file or preset name");
    optimize->add_option("--grid", opt_grid, "Grid file: 'cx cy a1 a2 omega' per line")
        ->required()
        ->check(CLI::ExistingFile);
    optimize->add_option("--out", opt_out, "Output directory for results.csv");
    optimize->add_option("--seed", opt_seed, "Override the sampling seed");

    std::string w2_a;
    std::string w2_b;
    auto* w2 = app.add_subcommand("w2", "Exact W2 distance between two cloud CSV files");
    w2->add_option("a", w2_a, "First cloud CSV")->required()->check(CLI::ExistingFile);
    w2->add_option("b", w2_b, "Second cloud CSV")->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitUsage;
    }

    try {
        if (*run) return execute(run_flags, true, "run");
        if (*chk) {
            if (check_flags.out == "out") check_flags.out = "out/check";
            return execute(check_flags, false, "check");
        }
        if (*braess) {
            std::ostringstream csv;
            csv.precision(17);
            csv << "seed,none,stationary,moving\n";
            double sum[3] = {0.0, 0.0, 0.0};
            for (std::size_t k = 0; k < braess_seeds; ++k) {
                double m[3];
                const std::uint64_t seed = braess_seed + k;
                check(msw_braess_suite(seed, braess_integrator == "euler" ? MSW_EULER : MSW_RK4, m));
                std::printf("seed %llu: none %.4f  stationary %.4f  moving %.4f\n",
                            static_cast<unsigned long long>(seed), m[0], m[1], m[2]);
                csv << seed << ',' << m[0] << ',' << m[1] << ',' << m[2] << '\n';
                for (int i = 0; i < 3; ++i) sum[i] += m[i];
            }
            const auto n = static_cast<double>(braess_seeds);
            std::printf("mean: none %.4f  stationary %.4f  moving %.4f\n", sum[0] / n, sum[1] / n, sum[2] / n);
            if (!braess_out.empty()) {
                fs::create_directories(braess_out);
                std::ofstream((fs::path(braess_out) / "braess.csv").string(), std::ios::binary) << csv.str();
            }
            return 0;
        }
        if (*optimize) {
            RunFlags f;
            f.seed = opt_seed;
            Scenario base;
            load(opt_scenario, f, base);
            fs::create_directories(opt_out);
            double best[5];
            double objective = 0.0;
            const std::string csv = (fs::path(opt_out) / "results.csv").string();
            check(msw_optimize(base.p, opt_grid.c_str(), csv.c_str(), best, &objective));
            std::printf("best: center (%g, %g) axes (%g, %g) omega %g  objective %.4f\n", best[0], best[1], best[2],
                        best[3], best[4], objective);
            std::printf("results: %s\n", csv.c_str());
            return 0;
        }
        if (*w2) {
            double d = 0.0;
            check(msw_w2_csv(w2_a.c_str(), w2_b.c_str(), &d));
            std::printf("%.17g\n", d);
            return 0;
        }
    } catch (const Failure& e) {
        std::cerr << "error: " << msw_status_name(e.status) << ": " << e.message << "\n";
        return e.status == MSW_VALIDATION_ERROR || e.status == MSW_PARSE_ERROR ? kExitUsage : kExitRun;
    }
    return kExitUsage;
}
