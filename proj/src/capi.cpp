#include "msweep/msweep.h"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <new>
#include <sstream>
#include <string>

#include "msweep/report.hpp"
#include "msweep/scenarios.hpp"

struct msw_scenario {
    msweep::Scenario value;
};

struct msw_trajectory {
    std::shared_ptr<const msweep::Trajectory> traj;
    msweep::Scenario scenario;
};

struct msw_diagnostics {
    std::vector<msweep::InvariantRow> rows;
};

namespace {

using namespace msweep;

thread_local std::string g_last_error;

static_assert(static_cast<int>(ErrorCode::IoError) + 1 == MSW_IO_ERROR);

msw_status to_status(ErrorCode code) { return static_cast<msw_status>(static_cast<int>(code) + 1); }

msw_status set_error(msw_status status, const std::string& message) {
    g_last_error = message;
    return status;
}

template <class F>
msw_status guarded(F&& f) {
    try {
        g_last_error.clear();
        return f();
    } catch (const Error& e) {
        return set_error(to_status(e.code()), e.what());
    } catch (const std::bad_alloc&) {
        return set_error(MSW_INTERNAL_ERROR, "out of memory");
    } catch (const std::exception& e) {
        return set_error(MSW_INTERNAL_ERROR, e.what());
    } catch (...) {
        return set_error(MSW_INTERNAL_ERROR, "unknown failure");
    }
}

#define MSW_REQUIRE(cond, what) \
    if (!(cond)) return set_error(MSW_INVALID_ARGUMENT, what)

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::IoError, "cannot open '" + path + "' for writing");
    out << content;
    if (!out) fail(ErrorCode::IoError, "failed writing '" + path + "'");
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoError, "cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

double diagnostics_L(const msw_trajectory* t) {
    return t->scenario.validation == Validation::Advisory ? effective_L(*t->traj) : t->traj->field().declared_L();
}

}  // namespace

extern "C" {

const char* msw_version(void) { return "0.1.0"; }

const char* msw_status_name(msw_status status) {
    switch (status) {
        case MSW_OK: return "Ok";
        case MSW_INTERNAL_ERROR: return "InternalError";
        default:
            if (status > MSW_OK && status <= MSW_IO_ERROR)
                return to_string(static_cast<ErrorCode>(static_cast<int>(status) - 1));
            return "Unknown";
    }
}

const char* msw_last_error(void) { return g_last_error.c_str(); }

void msw_string_free(char* s) { std::free(s); }

msw_status msw_scenario_load(const char* path, msw_scenario** out) {
    MSW_REQUIRE(path && out, "null argument");
    return guarded([&] {
        *out = new msw_scenario{load_scenario(path)};
        return MSW_OK;
    });
}

msw_status msw_scenario_parse(const char* text, msw_scenario** out) {
    MSW_REQUIRE(text && out, "null argument");
    return guarded([&] {
        *out = new msw_scenario{parse_scenario(text)};
        return MSW_OK;
    });
}

msw_status msw_scenario_preset(const char* name, msw_scenario** out) {
    MSW_REQUIRE(name && out, "null argument");
    return guarded([&] {
        *out = new msw_scenario{preset(name)};
        return MSW_OK;
    });
}

msw_status msw_preset_names(char** out) {
    MSW_REQUIRE(out, "null argument");
    return guarded([&] {
        std::string all;
        for (const auto& n : preset_names()) all += n + "\n";
        *out = dup_string(all);
        return MSW_OK;
    });
}

msw_status msw_scenario_validate(const msw_scenario* s) {
    MSW_REQUIRE(s, "null scenario");
    return guarded([&] {
        validate(s->value);
        return MSW_OK;
    });
}

msw_status msw_scenario_info_get(const msw_scenario* s, msw_scenario_info* out) {
    MSW_REQUIRE(s && out, "null argument");
    return guarded([&] {
        const Scenario& v = s->value;
        const MovingSet ms = make_moving_set(v);
        *out = {v.tau,
                v.horizon,
                v.initial.kind == InitialKind::Points ? v.initial.points.size() : v.particles,
                v.seed,
                v.substeps,
                v.integrator == Integrator::Euler ? MSW_EULER : MSW_RK4,
                v.L,
                ms.lipschitz(),
                ms.reach(),
                v.validation == Validation::Strict ? 1 : 0};
        return MSW_OK;
    });
}

msw_status msw_scenario_set_tau(msw_scenario* s, double tau) {
    MSW_REQUIRE(s, "null scenario");
    MSW_REQUIRE(tau > 0.0 && std::isfinite(tau), "tau must be positive");
    s->value.tau = tau;
    return MSW_OK;
}

msw_status msw_scenario_set_particles(msw_scenario* s, size_t n) {
    MSW_REQUIRE(s, "null scenario");
    MSW_REQUIRE(n > 0, "particle count must be positive");
    MSW_REQUIRE(s->value.initial.kind != InitialKind::Points, "explicit point lists fix the particle count");
    s->value.particles = n;
    return MSW_OK;
}

msw_status msw_scenario_set_seed(msw_scenario* s, uint64_t seed) {
    MSW_REQUIRE(s, "null scenario");
    s->value.seed = seed;
    return MSW_OK;
}

msw_status msw_scenario_set_substeps(msw_scenario* s, size_t substeps) {
    MSW_REQUIRE(s, "null scenario");
    MSW_REQUIRE(substeps > 0, "substeps must be at least 1");
    s->value.substeps = substeps;
    return MSW_OK;
}

msw_status msw_scenario_set_integrator(msw_scenario* s, msw_integrator integrator) {
    MSW_REQUIRE(s, "null scenario");
    MSW_REQUIRE(integrator == MSW_EULER || integrator == MSW_RK4, "unknown integrator");
    s->value.integrator = integrator == MSW_EULER ? Integrator::Euler : Integrator::RK4;
    return MSW_OK;
}

msw_status msw_scenario_to_string(const msw_scenario* s, char** out) {
    MSW_REQUIRE(s && out, "null argument");
    return guarded([&] {
        *out = dup_string(serialize(s->value));
        return MSW_OK;
    });
}

msw_status msw_scenario_write(const msw_scenario* s, const char* path) {
    MSW_REQUIRE(s && path, "null argument");
    return guarded([&] {
        write_file(path, serialize(s->value));
        return MSW_OK;
    });
}

int msw_scenario_equal(const msw_scenario* a, const msw_scenario* b) {
    return a && b && a->value == b->value ? 1 : 0;
}

void msw_scenario_free(msw_scenario* s) { delete s; }

msw_status msw_run(const msw_scenario* s, msw_trajectory** out) {
    MSW_REQUIRE(s && out, "null argument");
    *out = nullptr;
    try {
        g_last_error.clear();
        auto traj = std::make_shared<const Trajectory>(simulate(s->value));
        *out = new msw_trajectory{std::move(traj), s->value};
        return MSW_OK;
    } catch (const RunAborted& e) {
        if (e.partial()) *out = new msw_trajectory{e.partial(), s->value};
        return set_error(to_status(e.code()), e.what());
    } catch (...) {
        return guarded([] () -> msw_status { throw; });
    }
}

size_t msw_trajectory_mesh_size(const msw_trajectory* t) { return t ? t->traj->mesh_size() : 0; }

size_t msw_trajectory_particles(const msw_trajectory* t) { return t ? t->traj->cloud(0).size() : 0; }

double msw_trajectory_time(const msw_trajectory* t, size_t j) { return t ? t->traj->time(j) : std::nan(""); }

msw_status msw_trajectory_positions(const msw_trajectory* t, size_t j, double* xy, size_t len) {
    MSW_REQUIRE(t && xy, "null argument");
    MSW_REQUIRE(j < t->traj->mesh_size(), "mesh index out of range");
    const auto& c = t->traj->cloud(j).coords();
    if (len < c.size()) return set_error(MSW_SIZE_MISMATCH, "buffer too small");
    std::copy(c.begin(), c.end(), xy);
    return MSW_OK;
}

msw_status msw_trajectory_velocities(const msw_trajectory* t, size_t j, double* v, size_t len) {
    MSW_REQUIRE(t && v, "null argument");
    MSW_REQUIRE(j < t->traj->velocity_count(), "no velocity recorded at this mesh index");
    const auto& vel = t->traj->velocities(j);
    if (len < 2 * vel.size()) return set_error(MSW_SIZE_MISMATCH, "buffer too small");
    for (std::size_t i = 0; i < vel.size(); ++i) {
        v[2 * i] = vel[i].x;
        v[2 * i + 1] = vel[i].y;
    }
    return MSW_OK;
}

double msw_trajectory_effective_l(const msw_trajectory* t) { return t ? effective_L(*t->traj) : std::nan(""); }

msw_status msw_trajectory_mass_in_region(const msw_trajectory* t, size_t j, double* out) {
    MSW_REQUIRE(t && out, "null argument");
    MSW_REQUIRE(j < t->traj->mesh_size(), "mesh index out of range");
    *out = mass_in_region(t->traj->cloud(j), t->scenario.region);
    return MSW_OK;
}

msw_status msw_trajectory_write_csv(const msw_trajectory* t, const char* path) {
    MSW_REQUIRE(t && path, "null argument");
    return guarded([&] {
        std::ofstream out(path, std::ios::binary);
        if (!out) fail(ErrorCode::IoError, std::string("cannot open '") + path + "' for writing");
        write_trajectory_csv(out, *t->traj);
        if (!out) fail(ErrorCode::IoError, std::string("failed writing '") + path + "'");
        return MSW_OK;
    });
}

msw_status msw_render_frames(const msw_trajectory* t, const char* dir, size_t every, size_t* written) {
    MSW_REQUIRE(t && dir, "null argument");
    MSW_REQUIRE(every > 0, "frame stride must be positive");
    return guarded([&] {
        std::filesystem::create_directories(dir);
        const std::size_t last = t->traj->mesh_size() - 1;
        std::size_t count = 0;
        for (std::size_t j = 0; j <= last; ++j) {
            if (j % every != 0 && j != last) continue;
            char name[64];
            std::snprintf(name, sizeof name, "frame_%06zu.svg", j);
            write_file((std::filesystem::path(dir) / name).string(),
                       render_frame_svg(*t->traj, j, t->scenario.workspace));
            ++count;
        }
        if (written) *written = count;
        return MSW_OK;
    });
}

void msw_trajectory_free(msw_trajectory* t) { delete t; }

msw_status msw_check(const msw_trajectory* t, const msw_trajectory* companion, unsigned checks,
                     msw_diagnostics** out) {
    MSW_REQUIRE(t && out, "null argument");
    MSW_REQUIRE((checks & ~static_cast<unsigned>(MSW_CHECK_ALL)) == 0, "unknown check bits");
    return guarded([&] {
        DiagnosticsOptions opt;
        opt.checks = checks;
        opt.L = diagnostics_L(t);
        opt.companion = companion ? companion->traj.get() : nullptr;
        opt.workspace = t->scenario.workspace;
        *out = new msw_diagnostics{check_invariants(*t->traj, opt)};
        return MSW_OK;
    });
}

size_t msw_diagnostics_count(const msw_diagnostics* d) { return d ? d->rows.size() : 0; }

msw_status msw_diagnostics_row(const msw_diagnostics* d, size_t i, msw_diag_row* out) {
    MSW_REQUIRE(d && out, "null argument");
    MSW_REQUIRE(i < d->rows.size(), "row index out of range");
    const auto& r = d->rows[i];
    *out = {r.t, r.name.c_str(), r.value, r.bound, r.pass ? 1 : 0};
    return MSW_OK;
}

size_t msw_diagnostics_first_failure(const msw_diagnostics* d) {
    if (!d) return 0;
    for (std::size_t i = 0; i < d->rows.size(); ++i)
        if (!d->rows[i].pass) return i;
    return d->rows.size();
}

msw_status msw_diagnostics_write_csv(const msw_diagnostics* d, const char* path) {
    MSW_REQUIRE(d && path, "null argument");
    return guarded([&] {
        std::ofstream out(path, std::ios::binary);
        if (!out) fail(ErrorCode::IoError, std::string("cannot open '") + path + "' for writing");
        write_diagnostics_csv(out, d->rows);
        return MSW_OK;
    });
}

void msw_diagnostics_free(msw_diagnostics* d) { delete d; }

msw_status msw_braess_suite(uint64_t seed, msw_integrator integrator, double out[3]) {
    MSW_REQUIRE(out, "null argument");
    return guarded([&] {
        const BraessResult r = braess_suite(seed, integrator == MSW_EULER ? Integrator::Euler : Integrator::RK4);
        out[0] = r.none;
        out[1] = r.stationary;
        out[2] = r.moving;
        return MSW_OK;
    });
}

msw_status msw_optimize(const msw_scenario* base, const char* grid_path, const char* csv_path, double best[5],
                        double* best_objective) {
    MSW_REQUIRE(base && grid_path, "null argument");
    return guarded([&] {
        const OptimizeResult res = optimize_obstacle(base->value, parse_grid(read_file(grid_path)));
        if (csv_path) {
            std::ostringstream os;
            os.precision(17);
            os << "cx,cy,a1,a2,omega,admissible,objective,runtime_s\n";
            for (const auto& e : res.table)
                os << e.params.center.x << ',' << e.params.center.y << ',' << e.params.axes.x << ','
                   << e.params.axes.y << ',' << e.params.omega << ',' << (e.admissible ? "true" : "false") << ','
                   << e.objective << ',' << e.runtime << '\n';
            write_file(csv_path, os.str());
        }
        if (best) {
            best[0] = res.best.center.x;
            best[1] = res.best.center.y;
            best[2] = res.best.axes.x;
            best[3] = res.best.axes.y;
            best[4] = res.best.omega;
        }
        if (best_objective) *best_objective = res.best_objective;
        return MSW_OK;
    });
}

msw_status msw_w2_csv(const char* a_path, const char* b_path, double* out) {
    MSW_REQUIRE(a_path && b_path && out, "null argument");
    return guarded([&] {
        std::istringstream a(read_file(a_path));
        std::istringstream b(read_file(b_path));
        *out = w2(ParticleCloud::from_points(read_cloud_csv(a)), ParticleCloud::from_points(read_cloud_csv(b))).distance;
        return MSW_OK;
    });
}

}  // extern "C"
