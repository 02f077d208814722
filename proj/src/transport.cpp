#include "msweep/transport.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "msweep/error.hpp"

namespace msweep {

ParticleCloud::ParticleCloud(std::size_t dim, std::vector<double> coords) : dim_(dim), coords_(std::move(coords)) {
    if (dim_ == 0) fail(ErrorCode::InvalidArgument, "cloud dimension must be positive");
    if (coords_.empty() || coords_.size() % dim_ != 0)
        fail(ErrorCode::InvalidArgument, "cloud needs N >= 1 points of dimension " + std::to_string(dim_));
    for (double c : coords_)
        if (!std::isfinite(c)) fail(ErrorCode::InvalidArgument, "cloud coordinates must be finite");
}

ParticleCloud ParticleCloud::from_points(std::span<const Vec2> points) {
    std::vector<double> c;
    c.reserve(2 * points.size());
    for (Vec2 p : points) {
        c.push_back(p.x);
        c.push_back(p.y);
    }
    return ParticleCloud(2, std::move(c));
}

std::vector<Vec2> ParticleCloud::points() const {
    std::vector<Vec2> out(size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = at(i);
    return out;
}

namespace {

void require_same_shape(const ParticleCloud& a, const ParticleCloud& b) {
    if (a.size() != b.size() || a.dim() != b.dim())
        fail(ErrorCode::SizeMismatch, "clouds differ in size (" + std::to_string(a.size()) + " vs " +
                                          std::to_string(b.size()) + ") or dimension");
}

double sq_dist(std::span<const double> x, std::span<const double> y) {
    double s = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double d = x[k] - y[k];
        s += d * d;
    }
    return s;
}

// Hungarian method with potentials (shortest augmenting paths), O(n^3).
// Returns row -> column.
std::vector<std::size_t> solve_assignment(const std::vector<double>& cost, std::size_t n) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
    std::vector<char> used(n + 1);
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = p[j0];
            double delta = inf;
            std::size_t j1 = 0;
            const double* row = cost.data() + (i0 - 1) * n;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = row[j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<std::size_t> row_to_col(n);
    for (std::size_t j = 1; j <= n; ++j) row_to_col[p[j] - 1] = j - 1;
    return row_to_col;
}

}  // namespace

double matching_cost(const ParticleCloud& a, const ParticleCloud& b, std::span<const std::size_t> perm) {
    require_same_shape(a, b);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += sq_dist(a.point(i), b.point(perm[i]));
    return s / static_cast<double>(a.size());
}

W2Result w2(const ParticleCloud& a, const ParticleCloud& b) {
    require_same_shape(a, b);
    const std::size_t n = a.size();
    std::vector<double> cost(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) cost[i * n + j] = sq_dist(a.point(i), b.point(j));
    W2Result r;
    r.plan.permutation = solve_assignment(cost, n);
    r.plan.cost = matching_cost(a, b, r.plan.permutation);
    r.distance = std::sqrt(r.plan.cost);
    return r;
}

ParticleCloud geodesic(const ParticleCloud& a, const ParticleCloud& b, const Assignment& plan, double t) {
    require_same_shape(a, b);
    if (!(t >= 0.0 && t <= 1.0)) fail(ErrorCode::ParameterOutOfRange, "geodesic parameter must lie in [0, 1]");
    if (plan.permutation.size() != a.size()) fail(ErrorCode::SizeMismatch, "plan does not match the clouds");
    std::vector<double> c(a.coords().size());
    const std::size_t d = a.dim();
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto x = a.point(i);
        const auto y = b.point(plan.permutation[i]);
        for (std::size_t k = 0; k < d; ++k) c[i * d + k] = (1.0 - t) * x[k] + t * y[k];
    }
    return ParticleCloud(d, std::move(c));
}

ParticleCloud project_measure(const ParticleCloud& a, const ProxRegularSet& set, ReachPolicy policy) {
    if (a.dim() != 2) fail(ErrorCode::InvalidArgument, "set projection needs planar clouds");
    ParticleCloud out = a;
    for (std::size_t i = 0; i < a.size(); ++i) {
        try {
            out.set(i, project(set, a.at(i), policy));
        } catch (const Error& e) {
            if (e.code() != ErrorCode::OutOfReach) throw;
            fail(ErrorCode::OutOfReach, "particle " + std::to_string(i) + ": " + e.what());
        }
    }
    return out;
}

double w2_derivative_check(const Curve& a, const Curve& b, double t, double h) {
    if (!(h > 0.0)) fail(ErrorCode::InvalidArgument, "finite-difference step must be positive");
    const double plus = w2(a(t + h).cloud, b(t + h).cloud).plan.cost;
    const double minus = w2(a(t - h).cloud, b(t - h).cloud).plan.cost;
    const CurveState sa = a(t);
    const CurveState sb = b(t);
    const W2Result at = w2(sa.cloud, sb.cloud);
    const std::size_t d = sa.cloud.dim();
    double inner = 0.0;
    for (std::size_t i = 0; i < sa.cloud.size(); ++i) {
        const std::size_t j = at.plan.permutation[i];
        const auto x = sa.cloud.point(i);
        const auto y = sb.cloud.point(j);
        for (std::size_t k = 0; k < d; ++k)
            inner += (sa.velocity[i * d + k] - sb.velocity[j * d + k]) * (x[k] - y[k]);
    }
    inner /= static_cast<double>(sa.cloud.size());
    return std::abs((plus - minus) / (2.0 * h) - 2.0 * inner);
}

}  // namespace msweep
