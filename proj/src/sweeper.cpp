#include "msweep/sweeper.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace msweep {

const char* to_string(Integrator integrator) {
    return integrator == Integrator::Euler ? "euler" : "rk4";
}

Trajectory::Trajectory(NonlocalField field, MovingSet moving_set, RunOptions options)
    : field_(std::move(field)), moving_set_(std::move(moving_set)), options_(options) {}

SchemeConstants Trajectory::constants() const {
    return {field_.declared_L(), moving_set_.lipschitz(), moving_set_.reach()};
}

std::size_t Trajectory::index_of(double t) const {
    const double q = t / options_.tau;
    const double j = std::round(q);
    if (!(j >= 0.0) || std::abs(q - j) > 1e-9 * std::max(1.0, std::abs(q)) ||
        j >= static_cast<double>(clouds_.size())) {
        std::ostringstream os;
        os.precision(17);
        os << "t = " << t << " is not a mesh time of this trajectory";
        fail(ErrorCode::MeshMismatch, os.str());
    }
    return static_cast<std::size_t>(j);
}

void Trajectory::push(ParticleCloud cloud, std::vector<Vec2> velocity_from_previous) {
    if (!clouds_.empty()) velocities_.push_back(std::move(velocity_from_previous));
    clouds_.push_back(std::move(cloud));
}

void Trajectory::set_final_velocity(std::vector<Vec2> v) {
    if (velocities_.size() + 1 != clouds_.size())
        fail(ErrorCode::PreconditionViolated, "final velocity set twice");
    velocities_.push_back(std::move(v));
}

CurveState Trajectory::state_at(double t) const {
    const double T = time(clouds_.size() - 1);
    if (clouds_.size() < 2 || !(t >= 0.0) || t > T + 1e-12)
        fail(ErrorCode::TimeOutOfHorizon, "state_at outside the computed horizon");
    const std::size_t n = clouds_.front().size();
    CurveState st{clouds_.back(), std::vector<double>(2 * n)};
    if (t >= T && velocities_.size() == clouds_.size()) {
        for (std::size_t i = 0; i < n; ++i) {
            st.velocity[2 * i] = velocities_.back()[i].x;
            st.velocity[2 * i + 1] = velocities_.back()[i].y;
        }
        return st;
    }
    const std::size_t j = std::min(static_cast<std::size_t>(std::floor(t / options_.tau)), clouds_.size() - 2);
    const double s = std::clamp(t - time(j), 0.0, options_.tau);
    const ParticleCloud& base = clouds_[j];
    if (j % 2 == 0) {
        const std::size_t sub = std::max<std::size_t>(1, options_.substeps);
        st.cloud = s > 0.0 ? transport_substep(base, base, field_, s, sub, options_.integrator) : base;
        for (std::size_t i = 0; i < n; ++i) {
            const Vec2 v = 2.0 * field_.evaluate(base, st.cloud.at(i));
            st.velocity[2 * i] = v.x;
            st.velocity[2 * i + 1] = v.y;
        }
    } else {
        st.cloud = base;
        for (std::size_t i = 0; i < n; ++i) {
            const Vec2 w = velocities_[j][i];
            st.cloud.set(i, base.at(i) + s * w);
            st.velocity[2 * i] = w.x;
            st.velocity[2 * i + 1] = w.y;
        }
    }
    return st;
}

ParticleCloud transport_substep(const ParticleCloud& cloud, const ParticleCloud& frozen, const NonlocalField& field,
                                double dt, std::size_t substeps, Integrator integrator, double* max_speed) {
    if (substeps == 0) fail(ErrorCode::InvalidArgument, "substeps must be at least 1");
    if (cloud.dim() != 2) fail(ErrorCode::InvalidArgument, "transport needs planar clouds");
    const double h = dt / static_cast<double>(substeps);
    double sup = 0.0;
    auto f = [&](Vec2 x) {
        const Vec2 v = field.evaluate(frozen, x);
        sup = std::max(sup, norm(v));
        return 2.0 * v;
    };
    ParticleCloud out = cloud;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        Vec2 x = cloud.at(i);
        for (std::size_t s = 0; s < substeps; ++s) {
            if (integrator == Integrator::Euler) {
                x += h * f(x);
            } else {
                const Vec2 k1 = f(x);
                const Vec2 k2 = f(x + (0.5 * h) * k1);
                const Vec2 k3 = f(x + (0.5 * h) * k2);
                const Vec2 k4 = f(x + h * k3);
                x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            }
        }
        out.set(i, x);
    }
    if (max_speed) *max_speed = sup;
    return out;
}

namespace {

std::vector<Vec2> doubled_field(const NonlocalField& field, const ParticleCloud& cloud, double& sup) {
    std::vector<Vec2> v(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const Vec2 f = field.evaluate(cloud, cloud.at(i));
        sup = std::max(sup, norm(f));
        v[i] = 2.0 * f;
    }
    return v;
}

}  // namespace

Trajectory run(const ParticleCloud& initial, const NonlocalField& field, const MovingSet& moving_set,
               const RunOptions& options) {
    if (initial.dim() != 2) fail(ErrorCode::InvalidArgument, "the scheme needs planar clouds");
    if (!(options.tau > 0.0) || !std::isfinite(options.tau))
        fail(ErrorCode::MeshMismatch, "tau must be positive and finite");
    if (options.substeps == 0) fail(ErrorCode::InvalidArgument, "substeps must be at least 1");
    const double q = options.horizon / (2.0 * options.tau);
    const double windows = std::round(q);
    if (!(windows >= 1.0) || std::abs(q - windows) > 1e-9 * q) {
        std::ostringstream os;
        os.precision(17);
        os << "horizon " << options.horizon << " is not a positive even multiple of tau = " << options.tau;
        fail(ErrorCode::MeshMismatch, os.str());
    }
    const auto K = static_cast<std::size_t>(windows);
    if (moving_set.horizon() < options.horizon * (1.0 - 1e-12))
        fail(ErrorCode::PreconditionViolated, "moving set horizon is shorter than the run horizon");

    const double L = field.declared_L();
    const double M = moving_set.lipschitz();
    const double r = moving_set.reach();
    if (options.require_feasible_step && !(2.0 * options.tau * (L + M) < r)) {
        std::ostringstream os;
        os.precision(17);
        os << "step infeasible: 2 tau (L + M) = " << 2.0 * options.tau * (L + M) << " is not below reach " << r;
        fail(ErrorCode::PreconditionViolated, os.str());
    }
    {
        const ProxRegularSet c0 = eval_moving(moving_set, 0.0);
        for (std::size_t i = 0; i < initial.size(); ++i)
            if (!contains(c0, initial.at(i)))
                fail(ErrorCode::PreconditionViolated,
                     "initial particle " + std::to_string(i) + " lies outside C(0)");
    }

    auto traj = std::make_shared<Trajectory>(field, moving_set, options);
    traj->push(initial, {});
    const double T = options.horizon;
    const double tau = options.tau;

    for (std::size_t k = 0; k < K; ++k) {
        const ParticleCloud& frozen = traj->cloud(2 * k);
        try {
            double sup = 0.0;
            std::vector<Vec2> v = doubled_field(field, frozen, sup);
            double stage_sup = 0.0;
            ParticleCloud moved =
                transport_substep(frozen, frozen, field, tau, options.substeps, options.integrator, &stage_sup);
            traj->note_field_magnitude(std::max(sup, stage_sup));
            traj->push(std::move(moved), std::move(v));

            const double t_next = std::min(static_cast<double>(2 * k + 2) * tau, T);
            const ProxRegularSet c = eval_moving(moving_set, t_next);
            const ParticleCloud& mid = traj->cloud(2 * k + 1);
            ParticleCloud projected = mid;
            std::vector<Vec2> w(mid.size());
            for (std::size_t i = 0; i < mid.size(); ++i) {
                Vec2 p;
                try {
                    p = project(c, mid.at(i), options.policy);
                } catch (const Error& e) {
                    if (e.code() != ErrorCode::OutOfReach) throw;
                    fail(ErrorCode::OutOfReach,
                         "window k = " + std::to_string(k) + ", particle " + std::to_string(i) + ": " + e.what());
                }
                projected.set(i, p);
                w[i] = (p - mid.at(i)) / tau;
            }
            traj->push(std::move(projected), std::move(w));
        } catch (const RunAborted&) {
            throw;
        } catch (const Error& e) {
            throw RunAborted(e.code(), e.what(), traj);
        }
    }
    try {
        double sup = 0.0;
        traj->set_final_velocity(doubled_field(field, traj->cloud(2 * K), sup));
        traj->note_field_magnitude(sup);
    } catch (const Error& e) {
        throw RunAborted(e.code(), e.what(), traj);
    }
    return std::move(*traj);
}

}  // namespace msweep
