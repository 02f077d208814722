#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "msweep/error.hpp"
#include "msweep/fields.hpp"
#include "oracles.hpp"

using namespace msweep;

namespace {

// Direct-summation references written out term by term.
Vec2 morse_reference(double aa, double ar, double a, double r, Vec2 drift, const std::vector<Vec2>& ys, Vec2 x) {
    double sx = 0.0;
    double sy = 0.0;
    for (Vec2 y : ys) {
        const double dx = x.x - y.x;
        const double dy = x.y - y.y;
        const double q = dx * dx + dy * dy;
        const double att = -aa / (2.0 * a * a) * std::exp(-q / (2.0 * a * a));
        const double rep = ar / (2.0 * r * r) * std::exp(-q / (2.0 * r * r));
        sx += (att + rep) * dx;
        sy += (att + rep) * dy;
    }
    const double n = static_cast<double>(ys.size());
    return {drift.x + sx / n, drift.y + sy / n};
}

Vec2 parabolic_reference(Vec2 x) {
    const double m = std::sqrt(x.x * x.x + x.y * x.y);
    return {-(1.0 + x.x * x.x) / (2.0 * m), -(2.0 * x.x * x.y) / (2.0 * m)};
}

double bump_reference(double eps, double beta, double r) {
    if (r >= eps) return 0.0;
    const double s = r / eps;
    return std::exp(1.0 / (s * s - 1.0)) / beta;
}

Vec2 congestion_reference(double eps, double kappa, double beta, const std::vector<Vec2>& ys, Vec2 x) {
    double density = 0.0;
    for (Vec2 y : ys) density += bump_reference(eps, beta, std::hypot(x.x - y.x, x.y - y.y));
    density /= static_cast<double>(ys.size());
    const double psi = 1.0 - 2.0 / std::numbers::pi * std::atan(kappa * density * density);
    const Vec2 w = parabolic_reference(x);
    return {w.x * psi, w.y * psi};
}

MorseParams preset_morse() {
    MorseParams p;
    p.drift.offset = {-0.3, -0.3};
    return p;
}

ParticleCloud cloud_of(const std::vector<Vec2>& pts) { return ParticleCloud::from_points(pts); }

}  // namespace

TEST_CASE("morse kernel basics") {
    const MorseParams p = preset_morse();
    CHECK(p.attraction_strength == 4.0);
    CHECK(p.repulsion_strength == 7.0);
    CHECK(p.attraction_range == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK(p.repulsion_range == 0.5);

    CHECK(morse_kernel(p, {0, 0}) == Vec2{0, 0});
    const Vec2 x{0.7, -1.2};
    const ParticleCloud one = cloud_of({x});
    CHECK(eval_morse(p, one, x) == Vec2{-0.3, -0.3});

    MorseParams q = p;
    q.drift = {};
    const ParticleCloud pair = cloud_of({{1.0, 2.0}, {-0.4, 0.6}});
    const Vec2 mid{0.3, 1.3};
    const Vec2 v = eval_morse(q, pair, mid);
    CHECK(std::abs(v.x) < 1e-15);
    CHECK(std::abs(v.y) < 1e-15);
}

TEST_CASE("morse kernel is odd") {
    const MorseParams p = preset_morse();
    std::mt19937_64 gen(5);
    for (Vec2 d : oracle::random_points(gen, 500, -3.0, 3.0)) CHECK(morse_kernel(p, -d) == -morse_kernel(p, d));
}

TEST_CASE("morse field matches direct summation") {
    const MorseParams p = preset_morse();
    const std::vector<Vec2> ys{{0.1, 0.2}, {-0.5, 0.4}, {0.9, -0.7}};
    const ParticleCloud c = cloud_of(ys);
    std::mt19937_64 gen(6);
    for (Vec2 x : oracle::random_points(gen, 100, -2.0, 2.0)) {
        const Vec2 ref = morse_reference(4.0, 7.0, 1.0 / std::sqrt(2.0), 0.5, {-0.3, -0.3}, ys, x);
        const Vec2 got = eval_morse(p, c, x);
        CHECK(std::abs(got.x - ref.x) <= 1e-12);
        CHECK(std::abs(got.y - ref.y) <= 1e-12);
    }
}

TEST_CASE("congestion presets and isolated particle") {
    const CongestionParams p;
    CHECK(p.epsilon == 0.3);
    CHECK(p.kappa == 1000.0);
    CHECK(p.beta == 0.466);

    const Vec2 x{2.0, 1.0};
    const ParticleCloud c = cloud_of({x, {4.0, 3.0}, {-3.0, 0.5}});
    const double psi = 1.0 - 2.0 / std::numbers::pi * std::atan(1000.0 * std::pow(bump_reference(0.3, 0.466, 0.0) / 3.0, 2));
    const Vec2 w = parabolic_reference(x);
    const Vec2 got = eval_congestion(p, c, x);
    CHECK(got.x == doctest::Approx(w.x * psi).epsilon(1e-13));
    CHECK(got.y == doctest::Approx(w.y * psi).epsilon(1e-13));
}

TEST_CASE("congestion saturates under crowding") {
    const CongestionParams p;
    CHECK(congestion_saturation(p, 0.0) == 1.0);
    CHECK(congestion_saturation(p, 1e6) < 1e-9);
    const Vec2 x{2.0, 0.0};
    std::vector<Vec2> crowd(400, x);
    const Vec2 v = eval_congestion(p, cloud_of(crowd), x);
    // Full overlap gives the largest attainable density, eta(0).
    const double psi_max = 1.0 - 2.0 / std::numbers::pi * std::atan(1000.0 * std::pow(bump_reference(0.3, 0.466, 0.0), 2));
    CHECK(psi_max < 2e-3);
    CHECK(norm(v) == doctest::Approx(psi_max * norm(parabolic_reference(x))).epsilon(1e-12));
}

TEST_CASE("congestion field matches direct summation") {
    const CongestionParams p;
    const Vec2 x{1.5, -0.4};
    const std::vector<Vec2> ys{{1.6, -0.3}, {1.4, -0.5}, {1.55, -0.2}, {1.35, -0.35}};
    const ParticleCloud c = cloud_of(ys);
    const Vec2 ref = congestion_reference(0.3, 1000.0, 0.466, ys, x);
    const Vec2 got = eval_congestion(p, c, x);
    CHECK(std::abs(got.x - ref.x) <= 1e-12);
    CHECK(std::abs(got.y - ref.y) <= 1e-12);
    CHECK(norm(got) <= norm(parabolic_reference(x)));
}

TEST_CASE("bump clamps near its support edge") {
    const CongestionParams p;
    CHECK(congestion_bump(p, 0.3) == 0.0);
    CHECK(congestion_bump(p, 0.5) == 0.0);
    const double edge = congestion_bump(p, 0.3 * (1.0 - 1e-15));
    CHECK(std::isfinite(edge));
    CHECK(edge >= 0.0);
    CHECK(congestion_bump(p, 0.0) == doctest::Approx(std::exp(-1.0) / 0.466));
}

TEST_CASE("parabolic drift is fenced at the origin") {
    const CongestionParams p;
    const ParticleCloud c = cloud_of({{1, 1}});
    CHECK_THROWS_AS(eval_congestion(p, c, {0.0, 0.0}), Error);
    try {
        eval_congestion(p, c, {1e-10, 0.0});
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DriftSingularity);
    }
    // Field lines are the parabolas x2 = c (1 + x1^2).
    const Vec2 x{0.8, 0.5};
    const Vec2 w = eval_drift(ParabolicDrift{}, x);
    const double slope = 2.0 * (x.y / (1.0 + x.x * x.x)) * x.x;
    CHECK(w.y / w.x == doctest::Approx(slope));
}

TEST_CASE("adding a neighbour never speeds a particle up") {
    const CongestionParams p;
    std::mt19937_64 gen(12);
    std::normal_distribution<double> n(0.0, 0.15);
    for (int rep = 0; rep < 200; ++rep) {
        const Vec2 x{2.0 + n(gen), n(gen)};
        std::vector<Vec2> ys;
        for (int k = 0; k < 5; ++k) ys.push_back(x + Vec2{n(gen), n(gen)});
        // At fixed N: a particle out of range versus one within range of x.
        ys.push_back({50.0, 50.0});
        const double far = norm(eval_congestion(p, cloud_of(ys), x));
        ys.back() = x + Vec2{0.05, -0.02};
        const double near = norm(eval_congestion(p, cloud_of(ys), x));
        CHECK(near <= far + 1e-15);
    }
}

TEST_CASE("fields are permutation invariant in the cloud") {
    const NonlocalField f(preset_morse(), 10.0);
    std::mt19937_64 gen(13);
    auto pts = oracle::random_points(gen, 30, -2.0, 2.0);
    const Vec2 x{0.3, 0.1};
    const Vec2 a = f.evaluate(cloud_of(pts), x);
    std::shuffle(pts.begin(), pts.end(), gen);
    const Vec2 b = f.evaluate(cloud_of(pts), x);
    CHECK(a.x == doctest::Approx(b.x).epsilon(1e-13));
    CHECK(a.y == doctest::Approx(b.y).epsilon(1e-13));
}

TEST_CASE("field construction") {
    CHECK_THROWS_AS(NonlocalField(preset_morse(), 0.0), Error);
    MorseParams bad = preset_morse();
    bad.repulsion_range = 0.0;
    CHECK_THROWS_AS(NonlocalField(bad, 1.0), Error);
    CongestionParams cbad;
    cbad.beta = -1.0;
    CHECK_THROWS_AS(NonlocalField(cbad, 1.0), Error);
    CHECK(NonlocalField(CongestionParams{}, 4.0).kind() == "congestion");
}

TEST_CASE("probing a constant drift") {
    CustomDriftParams p;
    p.drift.offset = {3.0, -4.0};
    const NonlocalField f(p, 5.0);
    const Box ws{{-1, -1}, {1, 1}};
    const ProbeResult r = probe_constants(f, ws, 200);
    CHECK(r.sup_bound == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(r.lip_x == 0.0);
    CHECK(r.lip_w2 == 0.0);
    CHECK_THROWS_AS(probe_constants(f, ws, 99), Error);

    const NonlocalField zero(CustomDriftParams{}, 1.0);
    const ProbeResult z = probe_constants(zero, ws, 200);
    CHECK(z.sup_bound == 0.0);
    CHECK(z.lip_x == 0.0);
    CHECK(z.lip_w2 == 0.0);
}

TEST_CASE("declared constant below a probe estimate is rejected") {
    CustomDriftParams p;
    p.drift.offset = {3.0, -4.0};
    const NonlocalField f(p, 4.0);
    const Box ws{{-1, -1}, {1, 1}};
    try {
        probe_constants(f, ws, 200);
        FAIL("expected DeclaredBoundViolated");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DeclaredBoundViolated);
    }
    CHECK_NOTHROW(probe_constants(f, ws, 200, 1, false));
}

TEST_CASE("morse probe is stable across seeds") {
    const NonlocalField f(preset_morse(), 10.0);
    const Box unit{{0, 0}, {1, 1}};
    const ProbeResult a = probe_constants(f, unit, 2000, 1);
    const ProbeResult b = probe_constants(f, unit, 2000, 2);
    for (auto [x, y] : {std::pair{a.sup_bound, b.sup_bound}, {a.lip_x, b.lip_x}, {a.lip_w2, b.lip_w2}}) {
        CHECK(x > 0.0);
        CHECK(std::isfinite(x));
        CHECK(std::abs(x - y) <= 0.1 * std::max(x, y));
    }
}

TEST_CASE("W2-Lipschitz probe bounds random cloud pairs") {
    const NonlocalField f(preset_morse(), 10.0);
    const Box unit{{0, 0}, {1, 1}};
    const ProbeResult probe = probe_constants(f, unit, 4000, 3);
    std::mt19937_64 gen(31);
    std::normal_distribution<double> nudge(0.0, 0.1);
    for (int rep = 0; rep < 100; ++rep) {
        auto p1 = oracle::random_points(gen, 8, 0.0, 1.0);
        auto p2 = p1;
        for (auto& q : p2) q += Vec2{nudge(gen), nudge(gen)};
        const ParticleCloud c1 = cloud_of(p1);
        const ParticleCloud c2 = cloud_of(p2);
        const double d = w2(c1, c2).distance;
        double sup = 0.0;
        for (Vec2 x : oracle::random_points(gen, 50, 0.0, 1.0)) sup = std::max(sup, norm(f.evaluate(c1, x) - f.evaluate(c2, x)));
        CHECK(sup <= probe.lip_w2 * d);
    }
}
