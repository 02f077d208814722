#include "msweep/scenarios.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <tuple>

namespace msweep {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

[[noreturn]] void invalid(const std::string& check, const std::string& detail) {
    fail(ErrorCode::ValidationError, check + ": " + detail);
}

std::string num(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

class Uniform01 {
public:
    explicit Uniform01(std::uint64_t seed) : gen_(seed) {}
    double operator()() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 gen_;
};

std::array<double, 3> cholesky(const std::array<double, 4>& c) {
    if (c[1] != c[2] || !(c[0] > 0.0))
        fail(ErrorCode::InvalidArgument, "covariance must be symmetric positive definite");
    const double l11 = std::sqrt(c[0]);
    const double l21 = c[1] / l11;
    const double rest = c[3] - l21 * l21;
    if (!(rest > 0.0)) fail(ErrorCode::InvalidArgument, "covariance must be symmetric positive definite");
    return {l11, l21, std::sqrt(rest)};
}

void check_box(const Box& b, const char* what) {
    if (!finite(b.lo) || !finite(b.hi) || !(b.lo.x < b.hi.x) || !(b.lo.y < b.hi.y))
        fail(ErrorCode::InvalidArgument, std::string(what) + " box must have lo < hi");
}

}  // namespace

NonlocalField make_field(const Scenario& s) { return NonlocalField(s.field, s.L); }

MovingSet make_moving_set(const Scenario& s) {
    std::vector<MovingPart> parts = s.obstacles;
    if (s.wall) parts.push_back({*s.wall, {}});
    if (parts.empty()) fail(ErrorCode::InvalidArgument, "scenario needs at least one obstacle or a wall");
    return MovingSet(std::move(parts), s.horizon, s.lipschitz.value_or(kNaN), s.reach.value_or(kNaN));
}

RunOptions make_run_options(const Scenario& s) {
    RunOptions o;
    o.tau = s.tau;
    o.horizon = s.horizon;
    o.substeps = s.substeps;
    o.integrator = s.integrator;
    const bool strict = s.validation == Validation::Strict;
    o.policy = strict ? ReachPolicy::Strict : ReachPolicy::UniqueNearest;
    o.require_feasible_step = strict;
    return o;
}

ParticleCloud sample_initial(const InitialSpec& spec, std::size_t n, std::uint64_t seed,
                             const ProxRegularSet* region) {
    if (spec.kind == InitialKind::Points) {
        if (spec.points.empty()) fail(ErrorCode::InvalidArgument, "point list is empty");
        if (n != spec.points.size())
            fail(ErrorCode::InvalidArgument, "point list has " + std::to_string(spec.points.size()) +
                                                 " entries but " + std::to_string(n) + " particles were requested");
        if (region)
            for (std::size_t i = 0; i < spec.points.size(); ++i)
                if (!contains(*region, spec.points[i]))
                    fail(ErrorCode::PreconditionViolated, "listed point " + std::to_string(i) + " lies outside C(0)");
        return ParticleCloud::from_points(spec.points);
    }
    if (n == 0) fail(ErrorCode::InvalidArgument, "particle count must be positive");

    Uniform01 u01(seed);
    std::function<Vec2()> draw;
    std::vector<Vec2> cells;  // stratified cell corners, consumed in order
    Vec2 cell_size{};
    std::size_t next_cell = 0;

    if (spec.kind == InitialKind::Gaussian) {
        if (!finite(spec.mean)) fail(ErrorCode::InvalidArgument, "mean must be finite");
        const auto l = cholesky(spec.covariance);
        draw = [&u01, l, mean = spec.mean]() {
            const double r = std::sqrt(-2.0 * std::log(1.0 - u01()));
            const double th = 2.0 * std::numbers::pi * u01();
            const double z0 = r * std::cos(th);
            const double z1 = r * std::sin(th);
            return mean + Vec2{l[0] * z0, l[1] * z0 + l[2] * z1};
        };
    } else {
        check_box(spec.box, "uniform");
        const Box b = spec.box;
        draw = [&u01, b]() {
            const double x = b.lo.x + (b.hi.x - b.lo.x) * u01();
            const double y = b.lo.y + (b.hi.y - b.lo.y) * u01();
            return Vec2{x, y};
        };
        if (spec.stratified) {
            const double w = b.hi.x - b.lo.x;
            const double h = b.hi.y - b.lo.y;
            const auto nx = std::max<std::size_t>(
                1, static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n) * w / h))));
            const std::size_t ny = (n + nx - 1) / nx;
            cell_size = {w / static_cast<double>(nx), h / static_cast<double>(ny)};
            for (std::size_t j = 0; j < ny; ++j)
                for (std::size_t i = 0; i < nx; ++i)
                    cells.push_back(b.lo + Vec2{cell_size.x * static_cast<double>(i),
                                                cell_size.y * static_cast<double>(j)});
            // keep n cells: a partial Fisher-Yates pass picks them uniformly
            for (std::size_t k = 0; k < n && k + 1 < cells.size(); ++k) {
                const auto pick = k + static_cast<std::size_t>(u01() * static_cast<double>(cells.size() - k));
                std::swap(cells[k], cells[std::min(pick, cells.size() - 1)]);
            }
            cells.resize(n);
        }
    }

    std::vector<Vec2> pts;
    pts.reserve(n);
    const std::size_t max_attempts = 100 * n;
    std::size_t attempts = 0;
    while (pts.size() < n) {
        if (attempts >= max_attempts)
            fail(ErrorCode::SamplingStarved, "more than 99% of initial draws fell outside C(0) (" +
                                                 std::to_string(pts.size()) + " of " + std::to_string(n) +
                                                 " accepted after " + std::to_string(attempts) + " draws)");
        ++attempts;
        Vec2 p;
        if (next_cell < cells.size()) {
            const Vec2 c = cells[next_cell++];
            p = c + Vec2{cell_size.x * u01(), cell_size.y * u01()};
        } else {
            p = draw();
        }
        if (!region || contains(*region, p)) pts.push_back(p);
    }
    return ParticleCloud::from_points(pts);
}

double mass_in_region(const ParticleCloud& cloud, const RegionSpec& region) {
    std::size_t count = 0;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const Vec2 p = cloud.at(i);
        const bool in = region.kind == RegionKind::HalfSpace ? dot(region.normal, p) > region.offset
                                                             : region.box.contains(p);
        if (in) ++count;
    }
    return static_cast<double>(count) / static_cast<double>(cloud.size());
}

// =============================================================================
// Presets
// =============================================================================

namespace {

Scenario braess(const char* name, Vec2 center, Vec2 axes, double omega) {
    Scenario s;
    s.name = name;
    s.field = CongestionParams{};
    s.L = 4.0;
    s.obstacles.push_back({EllipseComplement{center, axes.x, axes.y, 0.0}, Motion{{}, omega}});
    s.wall = WallWithExit{0.6, 0.1, kInf};
    s.initial.kind = InitialKind::Uniform;
    s.initial.box = {{2.0, -4.0}, {6.0, 4.0}};
    s.particles = 300;
    s.tau = 0.01;
    s.horizon = 20.0;
    s.seed = 1;
    s.validation = Validation::Advisory;
    return s;
}

}  // namespace

std::vector<std::string> preset_names() {
    return {"attraction_repulsion", "braess_none",     "braess_stationary", "braess_moving",
            "congestion",           "halfspace_sweep", "rotating_ellipse"};
}

Scenario preset(std::string_view name) {
    if (name == "attraction_repulsion") {
        Scenario s;
        s.name = "attraction_repulsion";
        MorseParams m;
        m.drift.offset = {-0.3, -0.3};
        s.field = m;
        s.L = 10.0;
        s.obstacles.push_back(
            {EllipseComplement{{-2.0, -4.0}, std::sqrt(2.0), std::sqrt(0.5), 0.0}, Motion{{0.5, 0.5}, 0.0}});
        s.initial.kind = InitialKind::Gaussian;
        s.initial.mean = {4.0, 0.0};
        s.particles = 300;
        s.tau = 0.01;
        s.horizon = 20.0;
        return s;
    }
    if (name == "braess_none") return braess("braess_none", {100.0, 100.0}, {0.9, 0.16}, 0.0);
    if (name == "braess_stationary") return braess("braess_stationary", {1.1, 0.0}, {0.9, 0.16}, 0.0);
    if (name == "braess_moving") return braess("braess_moving", {1.1, 0.0}, {0.9, 0.1}, 1.0);
    if (name == "congestion") {
        Scenario s;
        s.name = "congestion";
        CongestionParams c;
        c.drift = AffineDrift{{0.0, 0.0, 0.0, 0.0}, {-1.0, 0.0}};
        s.field = c;
        s.L = 80.0;
        s.obstacles.push_back({BallComplement{{0.0, 0.0}, 1.0}, Motion{}});
        s.initial.kind = InitialKind::Uniform;
        s.initial.box = {{1.5, -1.0}, {3.5, 1.0}};
        s.particles = 100;
        s.tau = 0.01;
        s.horizon = 2.0;
        s.validation = Validation::Advisory;
        return s;
    }
    if (name == "halfspace_sweep") {
        Scenario s;
        s.name = "halfspace_sweep";
        s.field = CustomDriftParams{};
        s.L = 0.1;
        s.obstacles.push_back({HalfSpace{{1.0, 0.0}, 0.0}, Motion{{-1.0, 0.0}, 0.0}});
        s.initial.kind = InitialKind::Points;
        s.initial.points = {{0.0, 0.0}};
        s.particles = 1;
        s.tau = 0.01;
        s.horizon = 1.0;
        return s;
    }
    if (name == "rotating_ellipse") {
        Scenario s;
        s.name = "rotating_ellipse";
        CustomDriftParams d;
        d.drift.offset = {-0.5, 0.0};
        s.field = d;
        s.L = 0.5;
        s.obstacles.push_back({EllipseComplement{{0.0, 0.0}, 1.0, 0.5, 0.0}, Motion{{}, 0.5}});
        s.initial.kind = InitialKind::Uniform;
        s.initial.box = {{1.5, -0.5}, {2.5, 0.5}};
        s.particles = 50;
        s.tau = 0.01;
        s.horizon = 4.0;
        return s;
    }
    fail(ErrorCode::InvalidArgument, "unknown preset '" + std::string(name) + "'");
}

// =============================================================================
// Validation and runs
// =============================================================================

void validate(const Scenario& s) {
    if (!(s.tau > 0.0) || !(s.horizon > 0.0)) invalid("mesh", "tau and horizon must be positive");
    const double q = s.horizon / (2.0 * s.tau);
    if (std::round(q) < 1.0 || std::abs(q - std::round(q)) > 1e-9 * q)
        invalid("mesh", "horizon " + num(s.horizon) + " is not an even multiple of tau " + num(s.tau));
    if (s.substeps == 0) invalid("mesh", "substeps must be at least 1");
    if (s.initial.kind != InitialKind::Points && s.particles == 0) invalid("initial", "particle count is zero");
    if (s.initial.kind == InitialKind::Points && s.particles != s.initial.points.size())
        invalid("initial", "particles = " + std::to_string(s.particles) + " but " +
                               std::to_string(s.initial.points.size()) + " points are listed");

    std::optional<NonlocalField> field;
    std::optional<MovingSet> ms;
    try {
        check_box(s.workspace, "workspace");
        field.emplace(make_field(s));
        ms.emplace(make_moving_set(s));
    } catch (const Error& e) {
        invalid("parameters", e.what());
    }
    const double L = field->declared_L();
    const double M = ms->lipschitz();
    const double r = ms->reach();

    if (s.validation == Validation::Strict && !(2.0 * s.tau * (L + M) < r))
        invalid("tau-feasibility", "2 tau (L + M) = " + num(2.0 * s.tau * (L + M)) + " is not below reach " + num(r));

    for (double t : {0.0, 0.5 * s.horizon, s.horizon}) {
        const RBallReport rep = r_ball_test(eval_moving(*ms, t), r, s.workspace, 256);
        if (!rep.ok) {
            std::ostringstream os;
            os.precision(17);
            os << "declared reach " << r << " fails at t = " << t << ": boundary point (" << rep.boundary_point.x
               << ", " << rep.boundary_point.y << "), set point (" << rep.set_point.x << ", " << rep.set_point.y
               << "), excess " << rep.worst_excess;
            invalid("reach", os.str());
        }
    }

    const LipschitzReport lip = hausdorff_lipschitz_test(*ms, s.workspace, 16, 512);
    if (!lip.ok)
        invalid("hausdorff-lipschitz", "d_H(C(" + num(lip.t) + "), C(" + num(lip.s) + ")) / dt = " +
                                           num(lip.worst_ratio) + " exceeds M = " + num(M));

    if (s.validation == Validation::Strict) {
        try {
            probe_constants(*field, s.workspace, 400, s.seed, true);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::DeclaredBoundViolated) throw;
            invalid("field-probe", e.what());
        }
    }
}

Trajectory simulate(const Scenario& s) {
    const NonlocalField field = make_field(s);
    const MovingSet ms = make_moving_set(s);
    const ProxRegularSet c0 = eval_moving(ms, 0.0);
    const ParticleCloud initial = sample_initial(s.initial, s.particles, s.seed, &c0);
    return run(initial, field, ms, make_run_options(s));
}

double effective_L(const Trajectory& traj) {
    return std::max(traj.field().declared_L(), traj.observed_field_sup());
}

BraessResult braess_suite(std::uint64_t seed, Integrator integrator) {
    auto mass = [&](const char* name) {
        Scenario s = preset(name);
        s.seed = seed;
        s.integrator = integrator;
        const Trajectory t = simulate(s);
        return mass_in_region(t.cloud(t.mesh_size() - 1), s.region);
    };
    return {mass("braess_none"), mass("braess_stationary"), mass("braess_moving")};
}

// =============================================================================
// Obstacle search
// =============================================================================

namespace {

auto key(const ObstacleParams& p) {
    return std::make_tuple(p.center.x, p.center.y, p.axes.x, p.axes.y, p.omega);
}

bool admissible_placement(const EllipseComplement& e, const Box& ws) {
    const double reach_out = std::max(e.a1, e.a2);
    const bool inside = e.center.x - reach_out >= ws.lo.x && e.center.x + reach_out <= ws.hi.x &&
                        e.center.y - reach_out >= ws.lo.y && e.center.y + reach_out <= ws.hi.y;
    const Vec2 nearest{std::clamp(e.center.x, ws.lo.x, ws.hi.x), std::clamp(e.center.y, ws.lo.y, ws.hi.y)};
    const bool outside = norm(e.center - nearest) > reach_out;
    return inside || outside;
}

}  // namespace

OptimizeResult optimize_obstacle(const Scenario& base, const std::vector<ObstacleParams>& grid) {
    std::size_t ellipse_index = base.obstacles.size();
    for (std::size_t i = 0; i < base.obstacles.size(); ++i) {
        if (std::holds_alternative<EllipseComplement>(base.obstacles[i].shape)) {
            if (ellipse_index != base.obstacles.size())
                fail(ErrorCode::InvalidArgument, "base scenario has more than one elliptic obstacle");
            ellipse_index = i;
        }
    }
    if (ellipse_index == base.obstacles.size())
        fail(ErrorCode::InvalidArgument, "base scenario has no elliptic obstacle");
    if (grid.empty()) fail(ErrorCode::InvalidArgument, "parameter grid is empty");

    OptimizeResult res;
    for (const ObstacleParams& p : grid) {
        const auto start = std::chrono::steady_clock::now();
        GridEvaluation ev{p, false, kNaN, 0.0};
        Scenario s = base;
        auto& part = s.obstacles[ellipse_index];
        auto e = std::get<EllipseComplement>(part.shape);
        e.center = p.center;
        e.a1 = p.axes.x;
        e.a2 = p.axes.y;
        part.shape = e;
        part.motion = Motion{{}, p.omega};

        if (admissible_placement(e, s.workspace)) {
            const MovingSet ms = make_moving_set(s);
            const ProxRegularSet c0 = eval_moving(ms, 0.0);
            const ParticleCloud draw = sample_initial(s.initial, s.particles, s.seed);
            bool covered = true;
            for (std::size_t i = 0; i < draw.size() && covered; ++i) covered = contains(c0, draw.at(i));
            if (covered) {
                const Trajectory t = run(draw, make_field(s), ms, make_run_options(s));
                ev.admissible = true;
                ev.objective = mass_in_region(t.cloud(t.mesh_size() - 1), s.region);
            }
        }
        ev.runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        res.table.push_back(ev);
    }
    std::stable_sort(res.table.begin(), res.table.end(), [](const GridEvaluation& a, const GridEvaluation& b) {
        if (a.admissible != b.admissible) return a.admissible;
        if (a.admissible && a.objective != b.objective) return a.objective < b.objective;
        return key(a.params) < key(b.params);
    });
    if (!res.table.front().admissible)
        fail(ErrorCode::EmptyAdmissibleSet, "no grid point yields an admissible viability region");
    res.best = res.table.front().params;
    res.best_objective = res.table.front().objective;
    return res;
}

std::vector<ObstacleParams> parse_grid(std::string_view text) {
    std::vector<ObstacleParams> out;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        ObstacleParams p;
        if (!(ls >> p.center.x)) continue;
        std::string extra;
        if (!(ls >> p.center.y >> p.axes.x >> p.axes.y >> p.omega) || (ls >> extra))
            fail(ErrorCode::ParseError, "grid line " + std::to_string(lineno) + ": expected 'cx cy a1 a2 omega'");
        out.push_back(p);
    }
    if (out.empty()) fail(ErrorCode::ParseError, "grid has no entries");
    return out;
}

}  // namespace msweep
