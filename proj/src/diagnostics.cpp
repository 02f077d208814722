#include <algorithm>
#include <cmath>
#include <limits>

#include "msweep/sweeper.hpp"

namespace msweep {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_projection_index(const Trajectory& traj, std::size_t j) {
    if (j % 2 == 0 || j + 1 >= traj.mesh_size())
        fail(ErrorCode::MeshMismatch, "index " + std::to_string(j) + " does not start a projection interval");
}

Vec2 window_velocity(const Trajectory& traj, std::size_t j, std::size_t i) {
    return (traj.cloud(j + 1).at(i) - traj.cloud(j - 1).at(i)) / (2.0 * traj.tau());
}

double rms_displacement(const ParticleCloud& a, const ParticleCloud& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += norm2(a.at(i) - b.at(i));
    return std::sqrt(s / static_cast<double>(a.size()));
}

}  // namespace

std::vector<ResidualEntry> normal_cone_residual(const Trajectory& traj, std::size_t j, double L) {
    require_projection_index(traj, j);
    const double M = traj.moving_set().lipschitz();
    const double band = 2.0 * traj.tau() * (L + M);
    const ProxRegularSet c = eval_moving(traj.moving_set(), traj.time(j + 1));
    const ParticleCloud& mid = traj.cloud(j);
    const ParticleCloud& next = traj.cloud(j + 1);
    const auto& drive = traj.velocities(j - 1);

    std::vector<ResidualEntry> out(mid.size());
    for (std::size_t i = 0; i < mid.size(); ++i) {
        ResidualEntry& r = out[i];
        r.particle = i;
        const Vec2 e = window_velocity(traj, j, i) - 0.5 * drive[i];
        if (signed_distance(c, mid.at(i)) < -band) {
            r.residual = norm(e);
            continue;
        }
        r.boundary = true;
        try {
            const Vec2 n = outward_normal(c, next.at(i));
            const double en = dot(e, n);
            r.residual = norm(e - en * n) + std::max(0.0, en);
        } catch (const Error& err) {
            if (err.code() != ErrorCode::NonSmoothPoint) throw;
            r.skipped = true;
        }
    }
    return out;
}

std::vector<ResidualEntry> noflux_residual(const Trajectory& traj, std::size_t j) {
    require_projection_index(traj, j);
    const MovingSet& ms = traj.moving_set();
    const double t = traj.time(j + 1);
    const double T = traj.time(traj.mesh_size() - 1);
    const double h = 1e-6;
    const double t_lo = std::max(0.0, t - h);
    const double t_hi = std::min(std::min(T, ms.horizon()), t + h);
    const ProxRegularSet c = eval_moving(ms, t);
    const ProxRegularSet c_lo = eval_moving(ms, t_lo);
    const ProxRegularSet c_hi = eval_moving(ms, t_hi);
    const ProxRegularSet c0 = eval_moving(ms, 0.0);

    auto projected = [&](std::size_t to, std::size_t i) {
        return norm(traj.cloud(to).at(i) - traj.cloud(to - 1).at(i)) > 0.0;
    };

    const std::size_t n = traj.cloud(j).size();
    std::vector<ResidualEntry> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        ResidualEntry& r = out[i];
        r.particle = i;
        const bool before = j >= 3 ? projected(j - 1, i) : std::abs(signed_distance(c0, traj.cloud(0).at(i))) <= 1e-9;
        if (!projected(j + 1, i) || !before) continue;
        r.boundary = true;
        const Vec2 x = traj.cloud(j + 1).at(i);
        try {
            const double xi = (signed_distance(c_hi, x) - signed_distance(c_lo, x)) / (t_hi - t_lo);
            const Vec2 ex{h, 0.0};
            const Vec2 ey{0.0, h};
            const Vec2 eta{(signed_distance(c, x + ex) - signed_distance(c, x - ex)) / (2.0 * h),
                           (signed_distance(c, x + ey) - signed_distance(c, x - ey)) / (2.0 * h)};
            const double scale = std::sqrt(xi * xi + norm2(eta));
            if (!(scale > 0.0)) {
                r.skipped = true;
                continue;
            }
            r.residual = std::abs(xi + dot(window_velocity(traj, j, i), eta)) / scale;
        } catch (const Error& err) {
            if (err.code() != ErrorCode::NonSmoothPoint) throw;
            r.skipped = true;
        }
    }
    return out;
}

std::vector<double> stability_gap(const Trajectory& a, const Trajectory& b, const Box& workspace,
                                  std::size_t hausdorff_samples) {
    const SchemeConstants ka = a.constants();
    const SchemeConstants kb = b.constants();
    if (a.tau() != b.tau() || a.mesh_size() != b.mesh_size())
        fail(ErrorCode::ConstantMismatch, "trajectories use different meshes");
    if (ka.L != kb.L || ka.M != kb.M || ka.r != kb.r)
        fail(ErrorCode::ConstantMismatch, "trajectories declare different constants L, M or r");
    const double L = ka.L;
    const double M = ka.M;
    const double rate = 4.0 * L + (3.0 * L + M) / (2.0 * ka.r);

    std::vector<double> gap(a.mesh_size());
    double r0 = 0.0;
    double integral = 0.0;
    double prev_delta = 0.0;
    for (std::size_t j = 0; j < a.mesh_size(); ++j) {
        const double t = a.time(j);
        const double rj = 0.5 * w2(a.cloud(j), b.cloud(j)).plan.cost;
        const double delta = hausdorff(eval_moving(a.moving_set(), t), eval_moving(b.moving_set(), t), workspace,
                                       hausdorff_samples);
        if (j == 0) {
            r0 = rj;
        } else {
            integral += 0.5 * (prev_delta + delta) * a.tau();
        }
        prev_delta = delta;
        const double pre = r0 + (6.0 * L + 2.0 * M) * integral;
        const double rhs = pre > 0.0 ? pre * std::exp(rate * t) : 0.0;
        gap[j] = rhs - rj;
    }
    return gap;
}

std::vector<InvariantRow> check_invariants(const Trajectory& traj, const DiagnosticsOptions& options) {
    const double L = options.L > 0.0 ? options.L : traj.field().declared_L();
    const double M = traj.moving_set().lipschitz();
    const double tau = traj.tau();
    const std::size_t last = traj.mesh_size() - 1;
    std::vector<InvariantRow> rows;

    if (options.checks & kCheckSupport) {
        for (std::size_t j = 0; j <= last; ++j) {
            const ProxRegularSet c = eval_moving(traj.moving_set(), traj.time(j));
            const ParticleCloud& cl = traj.cloud(j);
            double worst = 0.0;
            for (std::size_t i = 0; i < cl.size(); ++i) worst = std::max(worst, distance(c, cl.at(i)));
            const double bound = j % 2 == 0 ? 1e-9 : 2.0 * tau * (L + M);
            rows.push_back({traj.time(j), "support", worst, bound, worst <= bound});
        }
    }

    if (options.checks & kCheckSpeed) {
        const double bound = 2.0 * (L + M) + 1e-9;
        const double w2_bound = 2.0 * (L + M) * tau + 1e-6;
        std::size_t within_limit = 0;
        for (std::size_t j = 0; j < last; ++j) {
            double worst = 0.0;
            for (Vec2 v : traj.velocities(j)) worst = std::max(worst, norm(v));
            if (worst <= 2.0 * L + M) ++within_limit;
            rows.push_back({traj.time(j), "speed", worst, bound, worst <= bound});

            double d = rms_displacement(traj.cloud(j), traj.cloud(j + 1));
            if (d > w2_bound) d = w2(traj.cloud(j), traj.cloud(j + 1)).distance;
            rows.push_back({traj.time(j), "w2_lipschitz", d, w2_bound, d <= w2_bound});
        }
        const double fraction = last > 0 ? static_cast<double>(within_limit) / static_cast<double>(last) : 1.0;
        rows.push_back({traj.time(last), "speed_limit_fraction", fraction, kNaN, true});
    }

    if (options.checks & kCheckCone) {
        const double bound = std::sqrt(2.0) * L * L * tau + 1e-6 * (1.0 + 2.0 * (L + M));
        for (std::size_t j = 1; j + 1 <= last; j += 2) {
            double worst = 0.0;
            for (const auto& e : normal_cone_residual(traj, j, L))
                if (!e.skipped) worst = std::max(worst, e.residual);
            rows.push_back({traj.time(j), "cone", worst, bound, worst <= bound});
        }
    }

    if (options.checks & kCheckNoFlux) {
        for (std::size_t j = 1; j + 1 <= last; j += 2) {
            double worst = 0.0;
            for (const auto& e : noflux_residual(traj, j))
                if (e.boundary && !e.skipped) worst = std::max(worst, e.residual);
            rows.push_back({traj.time(j), "noflux", worst, kNaN, true});
        }
    }

    if (options.checks & kCheckStability) {
        if (!options.companion)
            fail(ErrorCode::InvalidArgument, "the stability check needs a companion trajectory");
        const auto gap = stability_gap(traj, *options.companion, options.workspace, options.hausdorff_samples);
        for (std::size_t j = 0; j < gap.size(); ++j)
            rows.push_back({traj.time(j), "stability", gap[j], -1e-6, gap[j] >= -1e-6});
    }
    return rows;
}

}  // namespace msweep
