#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "msweep/scenarios.hpp"
#include "msweep/transport.hpp"
#include "oracles.hpp"

using namespace msweep;

namespace {

ParticleCloud cloud_of(const std::vector<Vec2>& pts) { return ParticleCloud::from_points(pts); }

ParticleCloud random_cloud(std::mt19937_64& gen, std::size_t n, double lo = -2.0, double hi = 2.0) {
    return cloud_of(oracle::random_points(gen, n, lo, hi));
}

}  // namespace

TEST_CASE("cloud construction") {
    CHECK_THROWS_AS(ParticleCloud(2, {}), Error);
    CHECK_THROWS_AS(ParticleCloud(2, {1.0, 2.0, 3.0}), Error);
    CHECK_THROWS_AS(ParticleCloud(0, {1.0}), Error);
    CHECK_THROWS_AS(ParticleCloud(2, {1.0, std::nan("")}), Error);
    const ParticleCloud c(3, {1, 2, 3, 4, 5, 6});
    CHECK(c.size() == 2);
    CHECK(c.point(1)[2] == 6.0);
}

TEST_CASE("w2 examples") {
    std::mt19937_64 gen(1);
    const ParticleCloud a = random_cloud(gen, 7);
    CHECK(w2(a, a).distance == 0.0);
    CHECK(w2(cloud_of({{0, 0}}), cloud_of({{3, 4}})).distance == doctest::Approx(5.0).epsilon(1e-15));
    CHECK_THROWS_AS(w2(a, random_cloud(gen, 6)), Error);
    CHECK_THROWS_AS(w2(a, ParticleCloud(3, std::vector<double>(21, 0.0))), Error);
}

TEST_CASE("assignment matches exhaustive search for small clouds") {
    std::mt19937_64 gen(42);
    for (std::size_t n = 1; n <= 8; ++n) {
        for (int rep = 0; rep < 12; ++rep) {
            const auto pa = oracle::random_points(gen, n, -3.0, 3.0);
            const auto pb = oracle::random_points(gen, n, -3.0, 3.0);
            const double expected = oracle::brute_force_w2_cost(pa, pb);
            const W2Result r = w2(cloud_of(pa), cloud_of(pb));
            CHECK(std::abs(r.plan.cost - expected) <= 1e-9);
            CHECK(r.distance == doctest::Approx(std::sqrt(r.plan.cost)));
            CHECK(matching_cost(cloud_of(pa), cloud_of(pb), r.plan.permutation) == doctest::Approx(r.plan.cost));
        }
    }
}

TEST_CASE("w2 metric properties") {
    std::mt19937_64 gen(9);
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t n = 1 + rep % 20;
        const ParticleCloud a = random_cloud(gen, n);
        const ParticleCloud b = random_cloud(gen, n);
        const ParticleCloud c = random_cloud(gen, n);
        const double ab = w2(a, b).distance;
        CHECK(ab == doctest::Approx(w2(b, a).distance).epsilon(1e-12));
        CHECK(w2(a, c).distance <= ab + w2(b, c).distance + 1e-9);

        // Independent shuffles of both clouds.
        auto pa = a.points();
        auto pb = b.points();
        std::shuffle(pa.begin(), pa.end(), gen);
        std::shuffle(pb.begin(), pb.end(), gen);
        CHECK(w2(cloud_of(pa), cloud_of(pb)).distance == doctest::Approx(ab).epsilon(1e-12));

        // Common translation.
        const Vec2 shift{0.7 * rep, -1.3};
        for (auto& p : pa) p += shift;
        for (auto& p : pb) p += shift;
        CHECK(w2(cloud_of(pa), cloud_of(pb)).distance == doctest::Approx(ab).epsilon(1e-9));
    }
}

TEST_CASE("optimal plan is cyclically monotone on random 4-cycles") {
    std::mt19937_64 gen(77);
    const ParticleCloud a = random_cloud(gen, 40);
    const ParticleCloud b = random_cloud(gen, 40);
    const auto plan = w2(a, b).plan.permutation;
    std::uniform_int_distribution<std::size_t> pick(0, 39);
    for (int rep = 0; rep < 2000; ++rep) {
        std::size_t idx[4];
        for (auto& k : idx) k = pick(gen);
        double matched = 0.0;
        double rotated = 0.0;
        for (int k = 0; k < 4; ++k) {
            matched += norm2(a.at(idx[k]) - b.at(plan[idx[k]]));
            rotated += norm2(a.at(idx[k]) - b.at(plan[idx[(k + 1) % 4]]));
        }
        CHECK(matched <= rotated + 1e-9);
    }
}

TEST_CASE("zero distance iff equal as multisets") {
    const ParticleCloud a = cloud_of({{0, 0}, {1, 1}, {1, 1}});
    const ParticleCloud b = cloud_of({{1, 1}, {0, 0}, {1, 1}});
    CHECK(w2(a, b).distance == 0.0);
    CHECK(w2(a, cloud_of({{0, 0}, {0, 0}, {1, 1}})).distance > 0.0);
}

TEST_CASE("geodesic") {
    const ParticleCloud a = cloud_of({{0, 0}});
    const ParticleCloud b = cloud_of({{2, 0}});
    const auto plan = w2(a, b).plan;
    CHECK(geodesic(a, b, plan, 0.5).at(0) == Vec2{1.0, 0.0});
    CHECK_THROWS_AS(geodesic(a, b, plan, 1.5), Error);
    CHECK_THROWS_AS(geodesic(a, b, plan, -0.1), Error);

    std::mt19937_64 gen(4);
    const ParticleCloud c = random_cloud(gen, 30);
    const ParticleCloud d = random_cloud(gen, 30);
    const W2Result r = w2(c, d);
    CHECK(geodesic(c, d, r.plan, 0.0) == c);
    CHECK(w2(geodesic(c, d, r.plan, 1.0), d).distance <= 1e-12);
    for (double s : {0.0, 0.2, 0.5}) {
        for (double t : {0.3, 0.7, 1.0}) {
            const double dist = w2(geodesic(c, d, r.plan, s), geodesic(c, d, r.plan, t)).distance;
            CHECK(std::abs(dist - std::abs(t - s) * r.distance) <= 1e-9);
        }
    }
}

TEST_CASE("measure projection") {
    const ProxRegularSet ball_c = ProxRegularSet::with_geometric_reach(Shape{{BallComplement{{0, 0}, 1.0}}});
    const ParticleCloud single = project_measure(cloud_of({{0.3, 0.0}}), ball_c);
    CHECK(single.at(0).x == doctest::Approx(1.0));

    const ParticleCloud outside = cloud_of({{2, 0}, {0, -3}});
    CHECK(project_measure(outside, ball_c) == outside);

    // Cost of the projection is the mean squared distance to the set.
    std::mt19937_64 gen(8);
    const ProxRegularSet ell = ProxRegularSet::with_geometric_reach(Shape{{EllipseComplement{{0, 0}, 2.0, 1.0, 0.2}}});
    std::vector<Vec2> pts;
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    while (pts.size() < 20) {
        const Vec2 p{u(gen), u(gen)};
        if (distance(ell, p) < 0.4) pts.push_back(p);
    }
    const ParticleCloud a = cloud_of(pts);
    const ParticleCloud pa = project_measure(a, ell);
    double mean_sq = 0.0;
    for (Vec2 p : pts) mean_sq += distance(ell, p) * distance(ell, p);
    mean_sq /= static_cast<double>(pts.size());
    CHECK(w2(a, pa).plan.cost == doctest::Approx(mean_sq).epsilon(1e-9));
    for (std::size_t i = 0; i < pa.size(); ++i) CHECK(contains(ell, pa.at(i)));
}

TEST_CASE("measure projection reports the offending particle") {
    const ProxRegularSet s(Shape{{BallComplement{{0, 0}, 1.0}}}, 0.5);
    try {
        project_measure(cloud_of({{2, 0}, {0.9, 0}, {0.1, 0}}), s);
        FAIL("expected OutOfReach");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::OutOfReach);
        CHECK(std::string(e.what()).find("particle 2") != std::string::npos);
    }
}

TEST_CASE("measure projection beats random feasible competitors") {
    std::mt19937_64 gen(21);
    const ProxRegularSet ell =
        ProxRegularSet::with_geometric_reach(Shape{{EllipseComplement{{1.1, 0.0}, 0.9, 0.16, 0.0}}});
    std::uniform_real_distribution<double> ux(0.0, 2.2);
    std::uniform_real_distribution<double> uy(-0.4, 0.4);
    std::normal_distribution<double> jitter(0.0, 0.2);
    for (int rep = 0; rep < 10; ++rep) {
        std::vector<Vec2> pts;
        while (pts.size() < 5) {
            const Vec2 p{ux(gen), uy(gen)};
            if (distance(ell, p) < 0.9 * ell.reach()) pts.push_back(p);
        }
        const ParticleCloud a = cloud_of(pts);
        const double best = w2(a, project_measure(a, ell)).distance;
        for (int k = 0; k < 1000; ++k) {
            std::vector<Vec2> comp;
            while (comp.size() < 5) {
                const Vec2 q = pts[comp.size()] + Vec2{jitter(gen), jitter(gen)};
                if (contains(ell, q, 0.0)) comp.push_back(q);
            }
            CHECK(best <= w2(a, cloud_of(comp)).distance + 1e-9);
        }
    }
}

TEST_CASE("derivative of the squared distance along curves") {
    // Identical curves.
    const Curve same = [](double t) {
        return CurveState{ParticleCloud::from_points(std::vector<Vec2>{{t, 0.0}, {0.0, 2.0 * t}}), {1, 0, 0, 2}};
    };
    CHECK(w2_derivative_check(same, same, 0.3, 1e-3) == 0.0);

    // Single particles with constant velocities: W2^2 is quadratic in t, so the
    // centred difference is exact up to rounding.
    const Vec2 x0{0.2, -0.1};
    const Vec2 u{1.0, 0.5};
    const Vec2 y0{1.5, 0.4};
    const Vec2 v{-0.3, 0.8};
    const Curve a = [&](double t) {
        const Vec2 p = x0 + t * u;
        return CurveState{ParticleCloud::from_points(std::vector<Vec2>{p}), {u.x, u.y}};
    };
    const Curve b = [&](double t) {
        const Vec2 p = y0 + t * v;
        return CurveState{ParticleCloud::from_points(std::vector<Vec2>{p}), {v.x, v.y}};
    };
    for (double h : {1e-1, 1e-2, 1e-3}) CHECK(w2_derivative_check(a, b, 0.4, h) <= 1e-10);
}

TEST_CASE("derivative check on two congestion runs") {
    Scenario s = preset("congestion");
    s.particles = 50;
    s.horizon = 0.4;
    const Trajectory ta = simulate(s);
    s.seed = 2;
    const Trajectory tb = simulate(s);
    // Inside a transport interval both curves are smooth.
    const double t = 0.205;
    const Curve ca = [&](double s_) { return ta.state_at(s_); };
    const Curve cb = [&](double s_) { return tb.state_at(s_); };
    CHECK(w2_derivative_check(ca, cb, t, 1e-3) <= 1e-2);
}
