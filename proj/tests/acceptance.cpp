// Acceptance suite. Usage: acceptance [criterion...]; no arguments runs all.
// Prints one PASS/FAIL line per criterion and exits non-zero on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "msweep/geometry.hpp"
#include "msweep/report.hpp"
#include "msweep/scenarios.hpp"
#include "msweep/sweeper.hpp"
#include "msweep/transport.hpp"
#include "oracles.hpp"

using namespace msweep;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

ParticleCloud cloud_of(const std::vector<Vec2>& pts) { return ParticleCloud::from_points(pts); }

ProxRegularSet single(Primitive p) { return ProxRegularSet::with_geometric_reach(Shape{{p}}); }

double diagnostics_L(const Scenario& s, const Trajectory& t) {
    return s.validation == Validation::Advisory ? effective_L(t) : t.field().declared_L();
}

// ---------------------------------------------------------------------------

Outcome braess_panel() {
    constexpr int kSeeds = 10;
    double sum[3] = {0, 0, 0};
    bool ordered = true;
    std::string seeds_out;
    for (int seed = 1; seed <= kSeeds; ++seed) {
        const BraessResult r = braess_suite(static_cast<std::uint64_t>(seed));
        sum[0] += r.none;
        sum[1] += r.stationary;
        sum[2] += r.moving;
        if (!(r.none > r.stationary && r.stationary > r.moving)) {
            ordered = false;
            seeds_out += fmt(" seed %d (%.3f, %.3f, %.3f)", seed, r.none, r.stationary, r.moving);
        }
    }
    const double none = sum[0] / kSeeds;
    const double stationary = sum[1] / kSeeds;
    const double moving = sum[2] / kSeeds;
    Outcome o;
    o.pass = std::abs(none - 0.1967) <= 0.05 && std::abs(stationary - 0.1467) <= 0.05 && moving <= 0.02 && ordered;
    o.detail = fmt("means none %.4f stationary %.4f moving %.4f", none, stationary, moving);
    if (!ordered) o.detail += "; ordering broken on" + seeds_out;
    return o;
}

Outcome halfspace_closed_form() {
    const Scenario s = preset("halfspace_sweep");
    const Trajectory t = simulate(s);
    const double M = t.moving_set().lipschitz();
    double worst = 0.0;
    for (std::size_t j = 0; j < t.mesh_size(); j += 2) {
        const Vec2 x = t.cloud(j).at(0);
        const double expected = -static_cast<double>(j) * s.tau * M;
        worst = std::max({worst, std::abs(x.x - expected), std::abs(x.y)});
    }
    return {worst <= 1e-9, fmt("max |x(2k tau) + 2k tau M| = %.3g over %zu even times", worst, t.mesh_size() / 2 + 1)};
}

Outcome assignment_oracle() {
    std::mt19937_64 gen(2024);
    std::uniform_int_distribution<std::size_t> size(1, 8);
    double worst = 0.0;
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t n = size(gen);
        const auto a = oracle::random_points(gen, n, -5.0, 5.0);
        const auto b = oracle::random_points(gen, n, -5.0, 5.0);
        const double exact = oracle::brute_force_w2_cost(a, b);
        worst = std::max(worst, std::abs(w2(cloud_of(a), cloud_of(b)).plan.cost - exact));
    }
    return {worst <= 1e-9, fmt("max cost gap %.3g over 200 pairs", worst)};
}

Outcome projection_optimality() {
    const ProxRegularSet ell = single(EllipseComplement{{1.1, 0.0}, 0.9, 0.16, 0.0});
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> ux(-0.2, 2.4);
    std::uniform_real_distribution<double> uy(-0.45, 0.45);
    std::normal_distribution<double> jitter(0.0, 0.15);
    std::uniform_int_distribution<std::size_t> size(1, 8);
    double worst = -kInf;
    std::size_t competitors = 0;
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t n = size(gen);
        std::vector<Vec2> pts;
        while (pts.size() < n) {
            const Vec2 p{ux(gen), uy(gen)};
            if (distance(ell, p) < 0.9 * ell.reach()) pts.push_back(p);
        }
        const ParticleCloud theta = cloud_of(pts);
        const double best = w2(theta, project_measure(theta, ell)).distance;
        for (int k = 0; k < 1000; ++k) {
            // Alternate local perturbations of the cloud and independent draws.
            std::vector<Vec2> comp;
            while (comp.size() < n) {
                const Vec2 q = k % 2 == 0 ? pts[comp.size()] + Vec2{jitter(gen), jitter(gen)} : Vec2{ux(gen), uy(gen)};
                if (contains(ell, q, 0.0)) comp.push_back(q);
            }
            worst = std::max(worst, best - w2(theta, cloud_of(comp)).distance);
            ++competitors;
        }
    }
    return {worst <= 1e-9, fmt("max W2(theta, P theta) - W2(theta, sigma) = %.3g over %zu competitors", worst,
                               competitors)};
}

Outcome preset_invariants() {
    Outcome o;
    std::mt19937_64 gen(5);
    for (const auto& name : preset_names()) {
        const Scenario s = preset(name);
        const Trajectory t = simulate(s);
        DiagnosticsOptions d;
        d.checks = kCheckSupport | kCheckSpeed;
        d.L = diagnostics_L(s, t);
        d.workspace = s.workspace;
        const auto rows = check_invariants(t, d);
        std::size_t failed = 0;
        for (const auto& r : rows) failed += !r.pass && r.name != "speed_limit_fraction";

        // Lipschitz bound on sampled non-adjacent mesh pairs with exact W2.
        const double lip = 2.0 * (d.L + t.constants().M);
        std::uniform_int_distribution<std::size_t> pick(0, t.mesh_size() - 1);
        double worst_pair = -kInf;
        for (int k = 0; k < 40; ++k) {
            const std::size_t i = pick(gen);
            const std::size_t j = pick(gen);
            const double gap = w2(t.cloud(i), t.cloud(j)).distance - lip * std::abs(t.time(i) - t.time(j));
            worst_pair = std::max(worst_pair, gap);
        }
        const bool ok = failed == 0 && worst_pair <= 1e-6;
        o.pass = o.pass && ok;
        o.detail += fmt("%s%s: %zu/%zu rows fail, max W2 excess over 40 pairs %.2g", o.detail.empty() ? "" : "; ", name.c_str(),
                        failed, rows.size(), worst_pair);
    }
    return o;
}

Outcome self_convergence() {
    Scenario s = preset("congestion");
    std::vector<ParticleCloud> finals;
    const std::vector<double> taus{0.04, 0.02, 0.01, 0.005};
    for (double tau : taus) {
        s.tau = tau;
        const Trajectory t = simulate(s);
        finals.push_back(t.cloud(t.mesh_size() - 1));
    }
    std::vector<double> d;
    for (std::size_t k = 0; k + 1 < finals.size(); ++k) d.push_back(w2(finals[k], finals[k + 1]).distance);
    Outcome o;
    o.detail = "W2 between successive halvings:";
    for (double v : d) o.detail += fmt(" %.4g", v);
    o.detail += "; ratios:";
    for (std::size_t k = 0; k + 1 < d.size(); ++k) {
        const double ratio = d[k + 1] / d[k];
        o.pass = o.pass && ratio <= 0.8;
        o.detail += fmt(" %.3f", ratio);
    }
    return o;
}

Outcome stability_estimate() {
    Outcome o;
    auto slack_of = [&](const Scenario& a, const Scenario& b, const char* label) {
        const Trajectory ta = simulate(a);
        const Trajectory tb = simulate(b);
        const auto gap = stability_gap(ta, tb, a.workspace);
        // gap[0] is zero by construction; the later entries carry the estimate.
        const double worst = *std::min_element(gap.begin(), gap.end());
        const double later = *std::min_element(gap.begin() + 1, gap.end());
        o.pass = o.pass && worst >= -1e-6;
        const std::size_t last = ta.mesh_size() - 1;
        const double r_end = 0.5 * std::pow(w2(ta.cloud(last), tb.cloud(last)).distance, 2);
        o.detail += fmt("%s%s min slack %.3g (t > 0: %.3g, r(T) %.3g)", o.detail.empty() ? "" : "; ", label, worst,
                        later, r_end);
    };

    const Scenario hs = preset("halfspace_sweep");
    Scenario hs_offset = hs;
    std::get<HalfSpace>(hs_offset.obstacles.at(0).shape).offset = 0.05;
    slack_of(hs, hs_offset, "offset half-plane");

    const Scenario re = preset("rotating_ellipse");
    for (Vec2 shift : {Vec2{0.05, 0.0}, Vec2{-0.03, 0.04}}) {
        Scenario moved = re;
        std::get<EllipseComplement>(moved.obstacles.at(0).shape).center += shift;
        slack_of(re, moved, fmt("ellipse shifted by (%g, %g)", shift.x, shift.y).c_str());
    }
    return o;
}

double max_entry(const std::vector<ResidualEntry>& v) {
    double m = 0.0;
    for (const auto& e : v)
        if (!e.skipped) m = std::max(m, e.residual);
    return m;
}

std::pair<double, double> max_residuals(const Trajectory& t, double L) {
    double cone = 0.0;
    double noflux = 0.0;
    for (std::size_t j = 1; j + 1 < t.mesh_size(); j += 2) {
        cone = std::max(cone, max_entry(normal_cone_residual(t, j, L)));
        noflux = std::max(noflux, max_entry(noflux_residual(t, j)));
    }
    return {cone, noflux};
}

Outcome residual_trends() {
    // Residuals below the finite-difference floor of the no-flux stencil count as zero.
    constexpr double kFloor = 1e-9;
    constexpr double kHorizon = 0.8;
    const MovingSet sweep({{HalfSpace{{1.0, 0.0}, 0.0}, {{-1.0, 0.0}, 0.0}}}, kHorizon, std::nan(""), std::nan(""));

    CustomDriftParams drift;
    drift.drift.matrix = {-0.5, 0.0, 0.0, -0.5};
    drift.drift.offset = {0.3, 0.2};
    const NonlocalField field(drift, 3.0);
    const ParticleCloud crowd = cloud_of({{-0.1, 0.0}, {-0.6, 0.5}, {-1.2, -0.4}});

    auto monotone = [&](const std::vector<double>& r) {
        for (std::size_t k = 0; k + 1 < r.size(); ++k)
            if (!(r[k + 1] < r[k] || (r[k] <= kFloor && r[k + 1] <= kFloor))) return false;
        return true;
    };

    std::vector<double> cone, noflux, closed_cone, closed_noflux;
    for (double tau : {0.04, 0.02, 0.01}) {
        RunOptions opt;
        opt.tau = tau;
        opt.horizon = kHorizon;
        const auto [c, n] = max_residuals(run(crowd, field, sweep, opt), 3.0);
        cone.push_back(c);
        noflux.push_back(n);
        const auto [cc, cn] =
            max_residuals(run(cloud_of({{0.0, 0.0}}), NonlocalField(CustomDriftParams{}, 0.1), sweep, opt), 0.1);
        closed_cone.push_back(cc);
        closed_noflux.push_back(cn);
    }
    // A translating boundary has zero no-flux residual in the limit and at every
    // step, so the rotating ellipse supplies a nontrivial no-flux trend.
    std::vector<double> ellipse_noflux;
    Scenario re = preset("rotating_ellipse");
    for (double tau : {0.04, 0.02, 0.01}) {
        re.tau = tau;
        ellipse_noflux.push_back(max_residuals(simulate(re), re.L).second);
    }

    Outcome o;
    o.pass = monotone(cone) && monotone(noflux) && monotone(closed_cone) && monotone(closed_noflux) &&
             monotone(ellipse_noflux) && closed_cone.back() <= 1e-3 && closed_noflux.back() <= 1e-3;
    auto list = [](const std::vector<double>& v) {
        std::string s;
        for (double x : v) s += fmt("%s%.3g", s.empty() ? "" : " ", x);
        return s;
    };
    o.detail = "drifted crowd cone [" + list(cone) + "] noflux [" + list(noflux) + "]; closed form cone [" +
               list(closed_cone) + "] noflux [" + list(closed_noflux) + "]; rotating ellipse noflux [" +
               list(ellipse_noflux) + "]";
    return o;
}

Outcome projection_continuity() {
    const Box ws{{-4.0, -4.0}, {4.0, 4.0}};
    const EllipseComplement base{{0.3, -0.2}, 2.0, 1.0, 0.35};
    const ProxRegularSet a = single(base);
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> theta(0.0, 2.0 * std::numbers::pi);
    std::uniform_real_distribution<double> depth(0.8, 1.2);
    std::uniform_real_distribution<double> dir(-1.0, 1.0);
    double worst_ratio = 0.0;
    std::size_t checks = 0;
    for (int q = 0; q < 20; ++q) {
        // Query points on both sides of the boundary, well inside the reach.
        const Vec2 on = ellipse_point(base, theta(gen));
        const Vec2 x = base.center + depth(gen) * (on - base.center);
        if (distance(a, x) >= 0.5 * a.reach()) continue;
        const Vec2 limit = project(a, x);
        const Vec2 dc{dir(gen), dir(gen)};
        const Vec2 dx{dir(gen), dir(gen)};
        const double da = dir(gen);
        const double dang = dir(gen);
        for (int k = 1; k <= 8; ++k) {
            const double eps = 0.2 * std::ldexp(1.0, -k);
            EllipseComplement ek = base;
            ek.center += eps * dc;
            ek.a1 += 0.5 * eps * da;
            ek.angle += 0.2 * eps * dang;
            const ProxRegularSet an = single(ek);
            const Vec2 xn = x + eps * dx;
            const double scale = std::max(hausdorff(an, a, ws, 4096), norm(xn - x));
            const double err = norm(project(an, xn, ReachPolicy::UniqueNearest) - limit);
            worst_ratio = std::max(worst_ratio, err / scale);
            ++checks;
        }
    }
    return {worst_ratio <= 2.0 && checks >= 80,
            fmt("max error / perturbation scale %.3f over %zu sequence terms", worst_ratio, checks)};
}

Outcome determinism() {
    Outcome o;
    for (const char* name : {"congestion", "rotating_ellipse", "attraction_repulsion"}) {
        Scenario s = preset(name);
        if (s.horizon > 2.0) s.horizon = 2.0;
        std::ostringstream a, b;
        write_trajectory_csv(a, simulate(s));
        write_trajectory_csv(b, simulate(s));
        const bool same = a.str() == b.str();
        o.pass = o.pass && same;
        o.detail += fmt("%s%s %s (%zu bytes)", o.detail.empty() ? "" : "; ", name, same ? "identical" : "DIFFER",
                        a.str().size());
    }
    return o;
}

struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> fn;
};

const std::vector<Criterion> kCriteria{
    {1, "crowd exit configurations over a 10-seed panel", braess_panel},
    {2, "half-plane sweep matches the closed form", halfspace_closed_form},
    {3, "assignment solver matches exhaustive search", assignment_oracle},
    {4, "measure projection beats feasible competitors", projection_optimality},
    {5, "scheme invariants on all presets", preset_invariants},
    {6, "self-convergence under step halving", self_convergence},
    {7, "stability estimate slack", stability_estimate},
    {8, "residual trends under step halving", residual_trends},
    {9, "projection continuity under set convergence", projection_continuity},
    {10, "bitwise determinism of trajectory output", determinism},
};

}  // namespace

int main(int argc, char** argv) {
    std::vector<int> wanted;
    for (int i = 1; i < argc; ++i) {
        char* end = nullptr;
        const long id = std::strtol(argv[i], &end, 10);
        if (*end != '\0' || id < 1 || id > static_cast<long>(kCriteria.size())) {
            std::fprintf(stderr, "usage: %s [criterion 1-%zu ...]\n", argv[0], kCriteria.size());
            return 2;
        }
        wanted.push_back(static_cast<int>(id));
    }
    if (wanted.empty())
        for (const auto& c : kCriteria) wanted.push_back(c.id);

    int failures = 0;
    for (int id : wanted) {
        const Criterion& c = kCriteria[static_cast<std::size_t>(id - 1)];
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s criterion %2d  %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                    secs);
        std::fflush(stdout);
        failures += !o.pass;
    }
    return failures == 0 ? 0 : 1;
}
